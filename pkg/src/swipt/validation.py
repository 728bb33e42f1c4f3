"""Self-check batteries shared by the ``validate`` command and the test-suite.

Each check returns a :class:`CheckResult` with a pass flag and a short
detail string, so callers can print a table or assert on it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import FrequencyResponse
from .gp import GpProblem, GpStatus, Monomial, Posynomial, condense, solve_gp, weights_from_point
from .harvester import NoiseProfile, RectennaParams, rate, zdc
from .optimizer import (InfeasibleRateError, OptimizationConfig, brute_force, max_rate,
                        optimize_waveform, wpt_only)
from .waveform import PowerBudget, WaveformDesign


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failing check
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


# -- GP battery ---------------------------------------------------------------

def _v(name):
    return Monomial.var(name)


def gp_instances() -> list[tuple[str, GpProblem, float]]:
    """Small GPs with known optimal objective values."""
    x, y, z = _v("x"), _v("y"), _v("z")
    P = Posynomial
    return [
        ("box bound", GpProblem((x * y) ** -1, [x / 2, y / 3]), 1 / 6),
        ("x + 1/x", GpProblem(x + x ** -1), 2.0),
        ("coupled bounds", GpProblem(x ** -1, [x ** 2 * y, Monomial(4) / y]), 2.0),
        ("equality", GpProblem(x + y, [], [x * y / 4]), 4.0),
        ("3x + 12/x", GpProblem(3 * x + 12 * x ** -1), 12.0),
        ("max volume", GpProblem((x * y * z) ** -1, [P([x * y, y * z, x * z]) / 3]), 1.0),
        ("AM-GM cube", GpProblem((x * y * z) ** -1, [P([x, y, z]) / 3]), 1.0),
        ("min sum given product", GpProblem(P([x, y, z]), [Monomial(8) / (x * y * z)]), 6.0),
        ("min squares given product", GpProblem(x ** 2 + y ** 2, [(x * y) ** -1]), 2.0),
        ("quadratic cap", GpProblem(x ** -1, [(x + x ** 2) / 2]), 1.0),
    ]


def check_gp_battery(rel_tol: float = 1e-6) -> CheckResult:
    def run():
        worst = 0.0
        bad = []
        for name, prob, expected in gp_instances():
            sol = solve_gp(prob)
            err = abs(sol.objective_value - expected) / abs(expected)
            worst = max(worst, err)
            if sol.status is not GpStatus.OPTIMAL or err > rel_tol:
                bad.append(f"{name} ({sol.status.value}, err {err:.1e})")
        if bad:
            return False, "; ".join(bad)
        return True, f"10 instances, worst relative error {worst:.1e}"
    return _timed("GP solver battery", run)


def random_posynomial(rng: np.random.Generator, max_terms: int = 8, nvars: int = 4) -> Posynomial:
    names = [f"x{i}" for i in range(nvars)]
    k = int(rng.integers(1, max_terms + 1))
    terms = []
    for _ in range(k):
        exps = {n: float(e) for n, e in zip(names, rng.normal(0, 1.5, nvars)) if rng.random() < 0.8}
        terms.append(Monomial(float(np.exp(rng.normal(0, 2))), exps))
    return Posynomial(terms)


def check_amgm(rng: np.random.Generator, count: int = 1000, probes: int = 20) -> CheckResult:
    """Condensed monomial never exceeds the posynomial and touches it at the anchor."""
    def run():
        worst_gap = 0.0
        worst_tight = 0.0
        for _ in range(count):
            p = random_posynomial(rng)
            names = sorted({n for n in p.variables} | {"x0"})
            anchor = {n: float(np.exp(rng.normal(0, 1))) for n in names}
            mono = condense(p, weights_from_point(p, anchor))
            pa = p.evaluate(anchor)
            worst_tight = max(worst_tight, abs(mono.evaluate(anchor) - pa) / pa)
            for _ in range(probes):
                pt = {n: float(np.exp(rng.normal(0, 2))) for n in names}
                # compare in log space to avoid overflow at extreme probes
                worst_gap = max(worst_gap, mono.log_evaluate(pt) - p.log_evaluate(pt))
        ok = worst_gap <= 1e-10 and worst_tight <= 1e-10
        return ok, (f"{count} posynomials, max log(mono/posy) {worst_gap:.1e}, "
                    f"max anchor mismatch {worst_tight:.1e}")
    return _timed("AM-GM dominance and tightness", run)


# -- matched-phase audit ------------------------------------------------------

def random_channel(rng: np.random.Generator, n: int, m: int) -> FrequencyResponse:
    return FrequencyResponse((rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))) / np.sqrt(2))


def check_matched_phases(rng: np.random.Generator, channels: int = 20, perturbations: int = 100,
                         slack: float = 1e-12, rect: RectennaParams = RectennaParams()) -> CheckResult:
    """Matched phases give the largest DC output and rate among random phase choices."""
    def run():
        worst_z = worst_r = -np.inf
        for _ in range(channels):
            n, m = int(rng.choice([1, 2, 4])), int(rng.choice([1, 2]))
            ch = random_channel(rng, n, m)
            s_p, s_i = rng.random((n, m)), rng.random((n, m))
            rho = float(rng.uniform(0.05, 0.95))
            noise = NoiseProfile.uniform(float(rng.uniform(0.1, 1.0)), n)
            matched = WaveformDesign(s_p, s_i, -ch.phases, -ch.phases, rho)
            z0 = zdc(matched, ch, rect)
            r0 = float(rate(s_i, rho, ch.amplitudes, noise, matched.phi_i + ch.phases))
            for _ in range(perturbations):
                d = matched.with_phases(matched.phi_p + rng.uniform(-np.pi, np.pi, (n, m)),
                                        matched.phi_i + rng.uniform(-np.pi, np.pi, (n, m)))
                z = zdc(d, ch, rect)
                r = float(rate(s_i, rho, ch.amplitudes, noise, d.phi_i + ch.phases))
                worst_z = max(worst_z, (z - z0) / z0)
                worst_r = max(worst_r, (r - r0) / max(r0, 1e-300))
        ok = worst_z <= slack and worst_r <= slack
        return ok, (f"{channels}x{perturbations} perturbations, max relative excess "
                    f"zdc {worst_z:.1e}, rate {worst_r:.1e}")
    return _timed("matched-phase optimality", run)


# -- scenario checks ---------------------------------------------------------

def reduced(channel: FrequencyResponse, noise: NoiseProfile, tones: int):
    """First ``tones`` tones of a channel, with the matching noise entries."""
    n = min(tones, channel.num_tones)
    return FrequencyResponse(channel.gains[:n]), NoiseProfile(noise.per_tone(channel.num_tones)[:n])


def check_endpoints(channel, rect, noise, budget, config=OptimizationConfig(),
                    zdc_tol: float = 1e-4, rate_tol: float = 1e-6) -> CheckResult:
    """Zero rate floor reproduces the multisine-only optimum; the top floor gives the water-filling rate.

    ``zdc_tol`` is looser than ``rate_tol`` because the zero-floor run
    removes the OFDM waveform only sublinearly and the relative-change
    stopping rule can halt it slightly short of the boundary.
    """
    def run():
        w = wpt_only(channel, rect, budget, config)
        lo = optimize_waveform(channel, rect, noise, budget, config)
        r_max = max_rate(channel, noise, budget)
        hi = optimize_waveform(channel, rect, noise, budget,
                               OptimizationConfig(config.epsilon, config.i_max, r_max))
        # With few tones the OFDM waveform can out-harvest the multisine, so
        # the zero-floor design may beat the multisine-only one but never lose.
        e0 = (w.zdc - lo.zdc) / w.zdc
        e1 = abs(hi.rate - r_max) / r_max
        return (e0 <= zdc_tol and e1 <= rate_tol,
                f"multisine-only excess over zero-floor {e0:+.1e}, "
                f"top-floor rate vs water-filling {e1:.1e}")
    return _timed("endpoint consistency", run)


def check_brute_force_gap(channel, rect, noise, budget, config=OptimizationConfig(),
                          points: int = 4, resolution: float = 1e-2, max_gap: float = 0.02) -> CheckResult:
    """Successive condensation gets within ``max_gap`` of an exhaustive grid search."""
    def run():
        gaps = []
        r_max = max_rate(channel, noise, budget)
        for r in np.linspace(0, r_max, points + 1)[:-1]:
            bf = brute_force(channel, rect, noise, budget, float(r), resolution)
            if bf is None:
                continue
            try:
                res = optimize_waveform(channel, rect, noise, budget,
                                        OptimizationConfig(config.epsilon, config.i_max, float(r)))
            except InfeasibleRateError:
                continue
            gaps.append((bf.zdc - res.zdc) / bf.zdc)
        if not gaps:
            return False, "no feasible grid points"
        return max(gaps) <= max_gap, f"{len(gaps)} rate floors, worst gap {max(gaps):+.2%}"
    return _timed("brute-force gap", run)


def run_battery(channel: FrequencyResponse, rect: RectennaParams, noise: NoiseProfile,
                budget: PowerBudget, seed: int = 0, tones: int = 4,
                config: OptimizationConfig = OptimizationConfig(),
                amgm_count: int = 1000) -> list[CheckResult]:
    """Full invariant battery on a scenario cut down to ``tones`` tones."""
    rng = np.random.default_rng(seed)
    ch, nz = reduced(channel, noise, tones)
    results = [
        check_amgm(rng, amgm_count),
        check_matched_phases(rng, rect=rect),
        check_gp_battery(),
        check_endpoints(ch, rect, nz, budget, config),
    ]
    if ch.num_tones * ch.num_antennas <= 2:
        results.append(check_brute_force_gap(ch, rect, nz, budget, config))
    return results
