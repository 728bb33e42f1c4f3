"""Scenario files: YAML descriptions of grid, array, channel, rectenna, budget and noise.

Powers may be given in watts (``p_watt``, ``sigma2_watt``) or dBm
(``p_dbm``, ``sigma2_dbm``); this is the only place dBm appears, the
library itself works in linear units.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np
import yaml

from .channel import (ArrayGeometry, FrequencyGrid, FrequencyResponse, InvalidScenarioError,
                      PathTap, frequency_response)
from .harvester import DiodeParams, NoiseProfile, RectennaParams, k_coefficients
from .waveform import PowerBudget

DEFAULT_SCENARIO = "default_scenario.yaml"

_ALLOWED = {
    None: {"name", "grid", "array", "taps", "rectenna", "diode", "budget", "noise"},
    "grid": {"f0_hz", "center_hz", "delta_f_hz", "bandwidth_hz", "n"},
    "array": {"m", "spacing_m"},
    "taps": {"delay_s", "amplitude", "phase_rad", "angle_rad"},
    "rectenna": {"k2", "k4", "r_ant_ohm"},
    "diode": {"i_s", "a", "n_ideality", "v_t", "r_ant_ohm"},
    "budget": {"p_watt", "p_dbm"},
    "noise": {"sigma2_watt", "sigma2_dbm"},
}


class ScenarioError(InvalidScenarioError):
    """A scenario file is malformed; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class Scenario(NamedTuple):
    name: str
    grid: FrequencyGrid
    geometry: ArrayGeometry
    taps: tuple[PathTap, ...]
    rect: RectennaParams
    budget: PowerBudget
    noise: NoiseProfile
    source: str

    @property
    def channel(self) -> FrequencyResponse:
        return frequency_response(self.taps, self.grid, self.geometry)

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.num_tones, self.geometry.num_antennas


def dbm_to_watt(dbm) -> np.ndarray | float:
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(watt) -> np.ndarray | float:
    return 10.0 * np.log10(np.asarray(watt, dtype=float)) + 30.0


def _check_keys(section: str | None, data: Any) -> dict:
    where = section or "scenario"
    if not isinstance(data, dict):
        raise ScenarioError(where, f"expected a mapping, got {type(data).__name__}")
    unknown = set(data) - _ALLOWED[section]
    if unknown:
        raise ScenarioError(where, f"unknown key(s) {sorted(unknown)}; allowed {sorted(_ALLOWED[section])}")
    return data


def _number(section: str, data: dict, key: str, default=None) -> float:
    if key not in data:
        if default is None:
            raise ScenarioError(f"{section}.{key}", "missing")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        hint = " (write exponents with a sign, e.g. 1.0e+6)" if isinstance(v, str) else ""
        raise ScenarioError(f"{section}.{key}", f"expected a number, got {v!r}{hint}")
    return float(v)


def _one_of(section: str, data: dict, linear: str, log: str):
    if (linear in data) == (log in data):
        raise ScenarioError(section, f"give exactly one of {linear!r} or {log!r}")
    key = linear if linear in data else log
    v = data[key]
    if isinstance(v, list):
        if not v or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            raise ScenarioError(f"{section}.{key}", "expected a number or a list of numbers")
        arr = np.asarray(v, dtype=float)
    elif isinstance(v, (int, float)) and not isinstance(v, bool):
        arr = np.asarray(float(v))
    else:
        raise ScenarioError(f"{section}.{key}", f"expected a number, got {v!r}")
    return arr if key == linear else dbm_to_watt(arr)


def parse_scenario(data: Any, source: str = "<memory>") -> Scenario:
    """Validate a parsed YAML mapping and build the scenario objects."""
    data = _check_keys(None, data)
    for key in ("grid", "budget", "noise"):
        if key not in data:
            raise ScenarioError(key, "missing section")

    g = _check_keys("grid", data["grid"])
    n = g.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ScenarioError("grid.n", f"expected a positive integer, got {n!r}")
    if ("delta_f_hz" in g) == ("bandwidth_hz" in g):
        raise ScenarioError("grid", "give exactly one of 'delta_f_hz' or 'bandwidth_hz'")
    delta_f = (_number("grid", g, "delta_f_hz") if "delta_f_hz" in g
               else _number("grid", g, "bandwidth_hz") / n)
    if ("f0_hz" in g) == ("center_hz" in g):
        raise ScenarioError("grid", "give exactly one of 'f0_hz' or 'center_hz'")
    try:
        grid = (FrequencyGrid(_number("grid", g, "f0_hz"), delta_f, n) if "f0_hz" in g
                else FrequencyGrid.centered(_number("grid", g, "center_hz"), delta_f, n))
    except ScenarioError:
        raise
    except InvalidScenarioError as exc:
        raise ScenarioError("grid", str(exc)) from None

    a = _check_keys("array", data.get("array", {}))
    m = a.get("m", 1)
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise ScenarioError("array.m", f"expected a positive integer, got {m!r}")
    try:
        geometry = ArrayGeometry(m, _number("array", a, "spacing_m", 0.0))
    except ScenarioError:
        raise
    except InvalidScenarioError as exc:
        raise ScenarioError("array", str(exc)) from None

    raw_taps = data.get("taps", [{"amplitude": 1.0}])
    if not isinstance(raw_taps, list) or not raw_taps:
        raise ScenarioError("taps", "expected a non-empty list")
    taps = []
    for i, t in enumerate(raw_taps):
        sec = f"taps[{i}]"
        if not isinstance(t, dict):
            raise ScenarioError(sec, "expected a mapping")
        unknown = set(t) - _ALLOWED["taps"]
        if unknown:
            raise ScenarioError(sec, f"unknown key(s) {sorted(unknown)}")
        try:
            taps.append(PathTap(_number(sec, t, "delay_s", 0.0), _number(sec, t, "amplitude", 1.0),
                                _number(sec, t, "phase_rad", 0.0), _number(sec, t, "angle_rad", 0.0)))
        except InvalidScenarioError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(sec, str(exc)) from None

    if ("rectenna" in data) == ("diode" in data):
        raise ScenarioError("rectenna", "give exactly one of 'rectenna' or 'diode'")
    try:
        if "rectenna" in data:
            r = _check_keys("rectenna", data["rectenna"])
            rect = RectennaParams(_number("rectenna", r, "k2"), _number("rectenna", r, "k4"),
                                  _number("rectenna", r, "r_ant_ohm", 50.0))
        else:
            d = _check_keys("diode", data["diode"])
            diode = DiodeParams(_number("diode", d, "i_s"), _number("diode", d, "a", 0.0),
                                _number("diode", d, "n_ideality", 1.05),
                                _number("diode", d, "v_t", 25.85e-3))
            k2, k4 = k_coefficients(diode)
            rect = RectennaParams(k2, k4, _number("diode", d, "r_ant_ohm", 50.0))
    except InvalidScenarioError as exc:
        if isinstance(exc, ScenarioError):
            raise
        section = "rectenna" if "rectenna" in data else "diode"
        raise ScenarioError(section, str(exc)) from None

    b = _check_keys("budget", data["budget"])
    p = _one_of("budget", b, "p_watt", "p_dbm")
    if p.ndim != 0 or not p > 0:
        raise ScenarioError("budget", f"power must be a single positive number, got {p}")
    budget = PowerBudget(float(p))

    nz = _check_keys("noise", data["noise"])
    sigma2 = _one_of("noise", nz, "sigma2_watt", "sigma2_dbm")
    if sigma2.ndim == 1 and sigma2.size != n:
        raise ScenarioError("noise", f"{sigma2.size} per-tone values for {n} tones")
    try:
        noise = NoiseProfile(np.broadcast_to(sigma2, (n,)))
    except InvalidScenarioError as exc:
        raise ScenarioError("noise", str(exc)) from None

    name = data.get("name", Path(source).stem)
    return Scenario(str(name), grid, geometry, tuple(taps), rect, budget, noise, source)


def load_scenario(path=None) -> Scenario:
    """Read a scenario YAML file; ``None`` loads the bundled default scenario."""
    if path is None:
        text = resources.files("swipt.data").joinpath(DEFAULT_SCENARIO).read_text()
        source = f"<bundled>/{DEFAULT_SCENARIO}"
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ScenarioError("scenario", f"cannot read {path}: {exc.strerror}") from None
        source = str(path)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("scenario", f"invalid YAML: {exc}") from None
    return parse_scenario(data, source)


def default_scenario_text() -> str:
    return resources.files("swipt.data").joinpath(DEFAULT_SCENARIO).read_text()
