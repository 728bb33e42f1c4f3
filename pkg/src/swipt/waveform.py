"""Superposed multisine (power) + OFDM (information) transmit waveforms.

A design stores, per tone and antenna, the multisine amplitude ``s_p``,
the expected OFDM amplitude ``s_i = sqrt(P_I,n) * |w_I,n,m|``, both
phase matrices, and the receiver power-splitting ratio ``rho``. The
cyclic prefix is ignored throughout: every DC quantity is an average
over the useful symbol span ``1/delta_f``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel import ArrayGeometry, FrequencyGrid, FrequencyResponse, PathTap, array_phase


class WindowError(ValueError):
    """Requested output times fall outside the delayed transmit window."""


@dataclass(frozen=True)
class PowerBudget:
    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"power budget must be > 0, got {self.p}")


@dataclass(frozen=True)
class WaveformDesign:
    s_p: np.ndarray
    s_i: np.ndarray
    phi_p: np.ndarray | None = None
    phi_i: np.ndarray | None = None
    rho: float = 0.5

    def __post_init__(self):
        s_p = np.array(self.s_p, dtype=float, ndmin=2)
        s_i = np.array(self.s_i, dtype=float, ndmin=2)
        if s_p.shape != s_i.shape:
            raise ValueError(f"S_P {s_p.shape} and S_I {s_i.shape} must have the same shape")
        if np.any(s_p < 0) or np.any(s_i < 0):
            raise ValueError("amplitudes must be nonnegative")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        phases = []
        for name in ("phi_p", "phi_i"):
            ph = getattr(self, name)
            ph = np.zeros_like(s_p) if ph is None else np.array(ph, dtype=float, ndmin=2)
            if ph.shape != s_p.shape:
                raise ValueError(f"{name} shape {ph.shape} does not match amplitudes {s_p.shape}")
            phases.append(ph)
        for name, arr in zip(("s_p", "s_i", "phi_p", "phi_i"), (s_p, s_i, *phases)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def shape(self) -> tuple[int, int]:
        return self.s_p.shape

    @property
    def rho_bar(self) -> float:
        return 1.0 - self.rho

    def with_phases(self, phi_p, phi_i) -> "WaveformDesign":
        return WaveformDesign(self.s_p, self.s_i, phi_p, phi_i, self.rho)

    def to_dict(self) -> dict:
        n, m = self.shape
        return {
            "n": n, "m": m, "rho": self.rho,
            "s_p": self.s_p.reshape(-1).tolist(),
            "s_i": self.s_i.reshape(-1).tolist(),
            "phi_p": self.phi_p.reshape(-1).tolist(),
            "phi_i": self.phi_i.reshape(-1).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WaveformDesign":
        n, m = int(d["n"]), int(d["m"])

        def mat(key):
            flat = np.asarray(d[key], dtype=float)
            if flat.size != n * m:
                raise ValueError(f"{key} has {flat.size} entries, header says {n}x{m}")
            return flat.reshape(n, m)

        return cls(mat("s_p"), mat("s_i"), mat("phi_p"), mat("phi_i"), float(d["rho"]))


def save_design(design: WaveformDesign, path, extra: dict | None = None) -> None:
    """Write a design as JSON; matrices are flattened row-major under an n, m header."""
    payload = {"design": design.to_dict()}
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_design(path) -> WaveformDesign:
    payload = json.loads(Path(path).read_text())
    return WaveformDesign.from_dict(payload["design"] if "design" in payload else payload)


@dataclass(frozen=True)
class SymbolDraw:
    """One OFDM symbol vector ``x~_n`` together with its per-tone powers ``P_I,n``."""

    values: np.ndarray
    powers: np.ndarray

    @classmethod
    def draw(cls, powers, rng: np.random.Generator) -> "SymbolDraw":
        powers = np.asarray(powers, dtype=float)
        z = rng.standard_normal(powers.shape) + 1j * rng.standard_normal(powers.shape)
        return cls(z * np.sqrt(powers / 2), powers)


def matched_phases(channel: FrequencyResponse) -> tuple[np.ndarray, np.ndarray]:
    """Transmit phases ``-psi_bar`` for both waveforms, so received phases vanish."""
    phi = -channel.phases
    return phi.copy(), phi.copy()


def average_power(design: WaveformDesign) -> float:
    """``(||S_P||_F^2 + ||S_I||_F^2) / 2``, the average transmit power."""
    return 0.5 * float(np.sum(design.s_p ** 2) + np.sum(design.s_i ** 2))


@dataclass(frozen=True)
class TransmitSignal:
    """Sampled per-antenna transmit waveforms and their tone content.

    ``tones[n, m]`` is the complex amplitude of antenna ``m`` on tone ``n``,
    so ``samples[m] = Re(sum_n tones[n, m] * exp(j w_n t))``.
    """

    tones: np.ndarray
    grid: FrequencyGrid
    times: np.ndarray
    samples: np.ndarray = field(repr=False)

    def at(self, t, extra_phase=None) -> np.ndarray:
        """Per-antenna waveform at times ``t``; ``extra_phase`` (N, M) shifts each tone."""
        c = self.tones if extra_phase is None else self.tones * np.exp(1j * extra_phase)
        t = np.asarray(t, dtype=float)
        e = np.exp(1j * np.multiply.outer(t, self.grid.angular))
        return (e @ c).real.T


def synthesize_transmit(design: WaveformDesign, symbols: SymbolDraw | None,
                        grid: FrequencyGrid, t) -> TransmitSignal:
    """Transmit waveforms ``x_m(t)`` for one OFDM symbol.

    The OFDM amplitude on tone ``n`` is ``|w_I,n,m| * |x~_n|`` with phase
    ``phi_I,n,m + arg(x~_n)``, where ``|w_I,n,m| = s_I,n,m / sqrt(P_I,n)``.
    """
    n, m = design.shape
    if grid.num_tones != n:
        raise ValueError(f"grid has {grid.num_tones} tones, design has {n}")
    tones = design.s_p * np.exp(1j * design.phi_p)
    if symbols is not None:
        powers = np.broadcast_to(np.asarray(symbols.powers, dtype=float), (n,))
        with np.errstate(divide="ignore", invalid="ignore"):
            w_mag = np.where(powers[:, None] > 0, design.s_i / np.sqrt(powers)[:, None], 0.0)
        x = np.asarray(symbols.values, dtype=complex).reshape(n, 1)
        tones = tones + w_mag * np.exp(1j * design.phi_i) * x
    t = np.asarray(t, dtype=float)
    sig = TransmitSignal(tones=tones, grid=grid, times=t, samples=np.empty((m, t.size)))
    object.__setattr__(sig, "samples", sig.at(t))
    return sig


def propagate(transmit: TransmitSignal, taps: Sequence[PathTap], geometry: ArrayGeometry,
              t_out) -> np.ndarray:
    """Received single-antenna signal ``y(t) = sum_m sum_l alpha_l x_m^(l)(t - tau_l)``.

    ``x_m^(l)`` is antenna ``m``'s waveform with the path phase ``xi_l`` and
    the per-tone ULA offset applied. Every delayed time must fall inside the
    transmit sample window.
    """
    t_out = np.asarray(t_out, dtype=float)
    lo, hi = float(np.min(transmit.times)), float(np.max(transmit.times))
    grid = transmit.grid
    n, m = transmit.tones.shape
    if m != geometry.num_antennas:
        raise ValueError(f"transmit has {m} antennas, geometry has {geometry.num_antennas}")
    delta = array_phase(grid, geometry, [tap.departure_angle for tap in taps])
    y = np.zeros(t_out.shape)
    for li, tap in enumerate(taps):
        shifted = t_out - tap.delay
        if shifted.size and (shifted.min() < lo - 1e-15 or shifted.max() > hi + 1e-15):
            raise WindowError(
                f"delay {tap.delay:g} s needs transmit samples on [{shifted.min():g}, "
                f"{shifted.max():g}] but the window is [{lo:g}, {hi:g}]")
        x = transmit.at(shifted, extra_phase=delta[:, :, li] + tap.phase)
        y += tap.amplitude * np.sum(x, axis=0)
    return y
