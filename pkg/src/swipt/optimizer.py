"""Rate-energy region construction by successive GP condensation.

The DC output with matched phases is a posynomial in the amplitudes and
``rho``; maximizing it under a power budget and a rate floor is a reverse
GP. Each iteration replaces the DC posynomial and the per-tone rate
factors ``1 + rho_bar*C_n/sigma_n^2`` by their AM-GM monomial bounds at
the current point and solves the resulting standard GP.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import FrequencyResponse
from .gp import GpProblem, GpStatus, Monomial, Posynomial, condense, solve_gp, weights_from_point
from .harvester import NoiseProfile, RectennaParams, quadruples, rate, zdc_matched
from .waveform import PowerBudget, WaveformDesign, average_power, matched_phases

log = logging.getLogger(__name__)

FLOOR = 1e-12
# Largest rate floor actually imposed, as a fraction of the maximum rate:
# the maximum itself is only reached on the boundary rho = 0, S_P = 0.
RATE_CAP = 1 - 1e-10


class InfeasibleRateError(ValueError):
    def __init__(self, rate_floor: float, max_rate: float):
        super().__init__(f"rate floor {rate_floor:.6g} bits exceeds the maximum achievable "
                         f"rate {max_rate:.6g} bits")
        self.rate_floor = rate_floor
        self.max_rate = max_rate


@dataclass(frozen=True)
class OptimizationConfig:
    epsilon: float = 1e-6
    i_max: int = 100
    rate_floor: float = 0.0
    init_strategy: str = "matched"
    gp_tol: float = 1e-8
    gp_max_iter: int = 500

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.i_max < 1:
            raise ValueError("i_max must be >= 1")
        if not self.rate_floor >= 0:
            raise ValueError("rate_floor must be >= 0")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"unknown init strategy {self.init_strategy!r}; "
                             f"choose from {sorted(INIT_STRATEGIES)}")


@dataclass(frozen=True)
class Layout:
    """Which optimization variables exist.

    ``power_wave=False`` removes the multisine (WIT-only), ``info_wave=False``
    removes the OFDM waveform, and ``fixed_rho`` pins the splitting ratio.
    """

    num_tones: int
    num_antennas: int
    power_wave: bool = True
    info_wave: bool = True
    fixed_rho: float | None = None

    def __post_init__(self):
        if not (self.power_wave or self.info_wave):
            raise ValueError("at least one waveform must be present")
        if self.fixed_rho is not None and not 0 <= self.fixed_rho <= 1:
            raise ValueError("fixed rho must lie in [0, 1]")

    def sp_names(self) -> list[str]:
        if not self.power_wave:
            return []
        return [f"sP[{n},{m}]" for n in range(self.num_tones) for m in range(self.num_antennas)]

    def si_names(self) -> list[str]:
        if not self.info_wave:
            return []
        return [f"sI[{n},{m}]" for n in range(self.num_tones) for m in range(self.num_antennas)]

    @property
    def rho_names(self) -> list[str]:
        return [] if self.fixed_rho is not None else ["rho", "rhobar"]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.sp_names() + self.si_names() + self.rho_names)

    @property
    def amplitude_names(self) -> list[str]:
        return self.sp_names() + self.si_names()

    def point(self, design: WaveformDesign, rho_bar: float | None = None) -> dict[str, float]:
        pt = {}
        for name, v in zip(self.sp_names(), design.s_p.reshape(-1)):
            pt[name] = max(float(v), FLOOR)
        for name, v in zip(self.si_names(), design.s_i.reshape(-1)):
            pt[name] = max(float(v), FLOOR)
        if self.fixed_rho is None:
            pt["rho"] = max(design.rho, FLOOR)
            pt["rhobar"] = max(1.0 - design.rho if rho_bar is None else rho_bar, FLOOR)
        return pt

    def design(self, values: dict[str, float], channel: FrequencyResponse) -> WaveformDesign:
        shape = (self.num_tones, self.num_antennas)
        s_p = np.zeros(shape)
        s_i = np.zeros(shape)
        if self.power_wave:
            s_p = np.array([values[k] for k in self.sp_names()]).reshape(shape)
        if self.info_wave:
            s_i = np.array([values[k] for k in self.si_names()]).reshape(shape)
        rho = self.fixed_rho if self.fixed_rho is not None else min(values["rho"], 1.0)
        phi_p, phi_i = matched_phases(channel)
        return WaveformDesign(s_p, s_i, phi_p, phi_i, rho)

    def rho_bar(self, values: dict[str, float]) -> float:
        return 1.0 - self.fixed_rho if self.fixed_rho is not None else values["rhobar"]


@dataclass
class OptimizedDesign:
    design: WaveformDesign
    zdc: float
    rate: float
    iterations: int
    trajectory: list[float]
    status: str = "converged"
    rate_floor: float = 0.0
    rho_bar: float = 0.5
    power: float = 0.0
    rate_audit: float = 0.0
    iterate_rates: list[float] = field(default_factory=list)
    iterate_powers: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass
class RateEnergyPoint:
    rate_floor: float
    rate: float
    zdc: float
    rho: float
    iterations: int = 0
    status: str = "converged"
    num_tones: int = 1
    result: OptimizedDesign | None = field(default=None, repr=False)

    @property
    def rate_per_tone(self) -> float:
        return self.rate / self.num_tones


# -- posynomial construction -------------------------------------------------

def _pair_terms(A: np.ndarray, offset: int):
    """Index pairs and coefficients of ``sum_n sum_{m0,m1} s[n,m0]A[n,m0] s[n,m1]A[n,m1]``."""
    N, M = A.shape
    n, m0, m1 = np.meshgrid(np.arange(N), np.arange(M), np.arange(M), indexing="ij")
    n, m0, m1 = n.ravel(), m0.ravel(), m1.ravel()
    idx = np.stack([offset + n * M + m0, offset + n * M + m1], axis=1)
    return idx, A[n, m0] * A[n, m1]


def _quad_terms(A: np.ndarray, offset: int):
    N, M = A.shape
    q = quadruples(N)
    ms = np.array(list(itertools.product(range(M), repeat=4)))
    nq = np.repeat(q, len(ms), axis=0)
    mq = np.tile(ms, (len(q), 1))
    idx = offset + nq * M + mq
    coeff = np.prod(A[nq, mq], axis=1)
    return idx, coeff


def _rows(idx: np.ndarray, nvars: int) -> np.ndarray:
    E = np.zeros((idx.shape[0], nvars))
    rows = np.repeat(np.arange(idx.shape[0]), idx.shape[1])
    np.add.at(E, (rows, idx.ravel()), 1.0)
    return E


def zdc_posynomial(A, rect: RectennaParams, layout: Layout) -> Posynomial:
    """Matched-phase DC output expanded into monomials over ``layout.names``."""
    A = np.asarray(A, dtype=float)
    names = layout.names
    nv = len(names)
    NM = A.size
    sp_off = 0
    si_off = NM if layout.power_wave else 0
    R = rect.r_ant
    blocks = []  # (index matrix, coefficients, power of rho)
    if layout.power_wave:
        pi, pc = _pair_terms(A, sp_off)
        qi, qc = _quad_terms(A, sp_off)
        blocks += [(pi, rect.k2 * R / 2 * pc, 1), (qi, 3 * rect.k4 * R ** 2 / 8 * qc, 2)]
    if layout.info_wave:
        ii, ic = _pair_terms(A, si_off)
        sq_idx = np.concatenate([np.repeat(ii, len(ii), axis=0), np.tile(ii, (len(ii), 1))], axis=1)
        sq_c = np.outer(ic, ic).ravel()
        blocks += [(ii, rect.k2 * R / 2 * ic, 1), (sq_idx, 3 * rect.k4 * R ** 2 / 4 * sq_c, 2)]
    if layout.power_wave and layout.info_wave:
        x_idx = np.concatenate([np.repeat(pi, len(ii), axis=0), np.tile(ii, (len(pi), 1))], axis=1)
        x_c = np.outer(pc, ic).ravel()
        blocks.append((x_idx, 3 * rect.k4 * R ** 2 / 2 * x_c, 2))

    Es, cs = [], []
    for idx, c, rho_pow in blocks:
        keep = c > 0
        E = _rows(idx[keep], nv)
        c = c[keep]
        if layout.fixed_rho is None:
            E[:, names.index("rho")] = rho_pow
        else:
            c = c * layout.fixed_rho ** rho_pow
        Es.append(E)
        cs.append(c)
    c = np.concatenate(cs)
    E = np.vstack(Es)
    keep = c > 0
    if not np.any(keep):
        raise ValueError("the DC output is identically zero for this channel and layout")
    return Posynomial.from_arrays(names, np.log(c[keep]), E[keep])


def rate_factor_posynomials(A, noise_per_tone, layout: Layout) -> list[Posynomial | None]:
    """Per-tone ``1 + rho_bar*C_n/sigma_n^2``; ``None`` for tones with no usable gain."""
    A = np.asarray(A, dtype=float)
    names = layout.names
    nv = len(names)
    if not layout.info_wave:
        return [None] * A.shape[0]
    si_off = A.size if layout.power_wave else 0
    out = []
    N, M = A.shape
    for n in range(N):
        m0, m1 = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
        m0, m1 = m0.ravel(), m1.ravel()
        c = A[n, m0] * A[n, m1] / noise_per_tone[n]
        keep = c > 0
        if not np.any(keep):
            out.append(None)
            continue
        E = _rows(np.stack([si_off + n * M + m0[keep], si_off + n * M + m1[keep]], axis=1), nv)
        c = c[keep]
        if layout.fixed_rho is None:
            E[:, names.index("rhobar")] = 1.0
        else:
            c = c * (1.0 - layout.fixed_rho)
            if not np.any(c > 0):
                out.append(None)
                continue
        E = np.vstack([np.zeros((1, nv)), E])
        out.append(Posynomial.from_arrays(names, np.log(np.concatenate([[1.0], c])), E))
    return out


class SwiptProblem:
    """Posynomial data for one (channel, rectenna, noise, budget, layout) instance."""

    def __init__(self, channel: FrequencyResponse, rect: RectennaParams, noise: NoiseProfile,
                 budget: PowerBudget, layout: Layout | None = None):
        self.channel = channel
        self.A = channel.amplitudes
        N, M = self.A.shape
        self.layout = layout or Layout(N, M)
        if (self.layout.num_tones, self.layout.num_antennas) != (N, M):
            raise ValueError("layout does not match the channel dimensions")
        self.rect = rect
        self.noise = noise
        self.sigma2 = noise.per_tone(N)
        self.budget = budget
        self.zpos = zdc_posynomial(self.A, rect, self.layout)
        self.rate_factors = rate_factor_posynomials(self.A, self.sigma2, self.layout)
        amps = self.layout.amplitude_names
        self.power = Posynomial([Monomial(0.5 / budget.p, {a: 2.0}) for a in amps])

    def zdc(self, values) -> float:
        return self.zpos.evaluate(values)

    def solved_rate(self, values) -> float:
        """Rate as seen by the GP: with the auxiliary ``rho_bar`` in place of ``1 - rho``."""
        total = 0.0
        for f in self.rate_factors:
            if f is not None:
                total += f.log_evaluate(values) / np.log(2)
        return total

    def power_of(self, values) -> float:
        return self.power.evaluate(values) * self.budget.p if len(self.power) else 0.0

    def condensed_gp(self, anchor: dict[str, float], rate_floor: float) -> GpProblem:
        t0 = Monomial.var("t0")
        zc = condense(self.zpos, weights_from_point(self.zpos, anchor))
        constraints: list = [self.power, t0 / zc]
        names = self.layout.names
        if self.uses_rate(rate_floor):
            bound = Monomial(2.0 ** rate_floor)
            for f in self.rate_factors:
                if f is not None:
                    bound = bound / condense(f, weights_from_point(f, anchor))
            constraints.append(bound)
            if self.layout.fixed_rho is None:
                constraints.append(Posynomial([Monomial.var("rho"), Monomial.var("rhobar")]))
        else:
            # Without a rate constraint rho_bar is idle; leaving it in only
            # drives it toward the floor through a badly curved constraint.
            names = tuple(n for n in names if n != "rhobar")
            if self.layout.fixed_rho is None:
                constraints.append(Monomial.var("rho"))
        for name in names:
            constraints.append(Monomial(FLOOR, {name: -1.0}))
        return GpProblem(objective=t0 ** -1, constraints=constraints, variables=names + ("t0",))

    def uses_rate(self, rate_floor: float) -> bool:
        return rate_floor > 0 and any(f is not None for f in self.rate_factors)

    def complete(self, values: dict[str, float]) -> dict[str, float]:
        """Drop ``t0`` and restore ``rho_bar = 1 - rho`` when the GP did not carry it."""
        x = {k: v for k, v in values.items() if k != "t0"}
        if self.layout.fixed_rho is None and "rhobar" not in x:
            x["rhobar"] = max(1.0 - x["rho"], FLOOR)
        return x


def build_condensed_gp(A, rect: RectennaParams, noise: NoiseProfile, P: float, rate_floor: float,
                       anchor: dict[str, float], layout: Layout | None = None) -> GpProblem:
    """Standard GP obtained by condensing at ``anchor``.

    minimize ``1/t0`` subject to the power budget, ``t0 <= condensed z_DC``,
    ``2^rate_floor <= prod_n condensed(1 + rho_bar*C_n/sigma_n^2)`` (omitted
    when the floor is zero), ``rho + rho_bar <= 1`` and a ``1e-12`` floor on
    every variable other than ``t0``.
    """
    A = np.asarray(A, dtype=float)
    for k, v in anchor.items():
        if not v > 0:
            raise ValueError(f"anchor value for {k!r} must be positive, got {v}")
    channel = FrequencyResponse(A.astype(complex))
    return SwiptProblem(channel, rect, noise, PowerBudget(P), layout).condensed_gp(anchor, rate_floor)


# -- water-filling -----------------------------------------------------------

def waterfilling(A, noise, P: float) -> tuple[np.ndarray, float]:
    """Rate-maximizing OFDM amplitudes at ``rho = 0`` with matched beamforming.

    Per-tone symbol powers are ``max(0, mu - sigma_n^2/||h_n||^2)`` with the
    water level set so the OFDM waveform's average power ``sum_n P_n / 2``
    equals ``P`` (cosine amplitudes carry twice their average power).

    Returns:
        (S_I, max_rate) with ``S_I[n, m] = sqrt(P_n) * A[n, m] / ||h_n||``.
    """
    A = np.asarray(A, dtype=float)
    sigma2 = noise.per_tone(A.shape[0]) if isinstance(noise, NoiseProfile) else np.broadcast_to(
        np.asarray(noise, dtype=float), (A.shape[0],))
    if not P > 0:
        raise ValueError("P must be > 0")
    gain = np.sum(A ** 2, axis=1)
    total = 2.0 * P
    usable = gain > 0
    floors = np.full(A.shape[0], np.inf)
    floors[usable] = sigma2[usable] / gain[usable]
    order = np.argsort(floors)
    powers = np.zeros(A.shape[0])
    fs = floors[order]
    for k in range(int(np.sum(usable)), 0, -1):
        mu = (total + np.sum(fs[:k])) / k
        if mu > fs[k - 1]:
            powers[order[:k]] = mu - fs[:k]
            break
    norms = np.sqrt(gain)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_i = np.where(usable[:, None], np.sqrt(powers)[:, None] * A / norms[:, None], 0.0)
    max_rate = float(np.sum(np.log2(1 + powers * gain / sigma2)))
    return s_i, max_rate


def max_rate(channel: FrequencyResponse, noise: NoiseProfile, budget: PowerBudget,
             layout: Layout | None = None) -> float:
    if layout is not None and not layout.info_wave:
        return 0.0
    rho = 0.0 if layout is None or layout.fixed_rho is None else layout.fixed_rho
    if rho >= 1:
        return 0.0
    sigma2 = noise.per_tone(channel.num_tones) / (1 - rho)
    return waterfilling(channel.amplitudes, sigma2, budget.p)[1]


# -- initialization ----------------------------------------------------------

def _scaled_to_power(A, power):
    base = np.maximum(A, 0.0)
    norm2 = np.sum(base ** 2)
    if norm2 == 0:
        base = np.ones_like(A)
        norm2 = base.size
    return base * np.sqrt(2 * power / norm2)


def _init_matched(sp: SwiptProblem, rate_floor: float) -> dict[str, float]:
    """Half the budget to each waveform, amplitudes proportional to the channel, rho = 1/2."""
    lay = sp.layout
    share = sp.budget.p * (1 - 1e-6) / (int(lay.power_wave) + int(lay.info_wave))
    z = np.zeros_like(sp.A)
    s_p = _scaled_to_power(sp.A, share) if lay.power_wave else z
    s_i = _scaled_to_power(sp.A, share) if lay.info_wave else z
    rho = 0.5 if lay.fixed_rho is None else lay.fixed_rho
    return lay.point(WaveformDesign(s_p, s_i, rho=rho), rho_bar=(1 - rho) * (1 - 1e-9))


def _init_waterfilling(sp: SwiptProblem, rate_floor: float) -> dict[str, float]:
    """Water-filled OFDM plus a multisine share, shrunk just enough to clear the rate floor.

    With a fraction ``beta`` of the budget on the multisine and splitting
    ratio ``rho``, every per-tone SNR scales by ``x = (1-beta)(1-rho)``. The
    smallest admissible ``x`` is found by bisection; the point halfway
    between it and 1 is split evenly between ``beta`` and ``rho``.
    """
    lay = sp.layout
    s_wf, _ = waterfilling(sp.A, sp.sigma2, sp.budget.p)
    snr = np.sum(s_wf * sp.A, axis=1) ** 2 / sp.sigma2
    fixed = lay.fixed_rho
    scale_rho = 1.0 if fixed is None else 1 - fixed

    def rate_at(x):
        return float(np.sum(np.log2(1 + x * scale_rho * snr)))

    lo, hi = 0.0, 1.0
    if rate_at(1.0) <= rate_floor:
        x = 1.0
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if rate_at(mid) >= rate_floor else (mid, hi)
        x = hi + 0.5 * (1 - hi)
    if fixed is None and lay.power_wave:
        keep = np.sqrt(x)
    else:
        keep = x
    beta = 1 - keep if lay.power_wave else 0.0
    rho = 1 - keep if fixed is None else fixed
    if fixed is None and not lay.power_wave:
        rho = 1 - x
    s_i = np.sqrt(max(1 - beta, 0.0) * (1 - 1e-9)) * s_wf
    s_p = _scaled_to_power(sp.A, max(beta, FLOOR) * sp.budget.p) if lay.power_wave else np.zeros_like(sp.A)
    s_p = s_p * np.sqrt(1 - 1e-9)
    return lay.point(WaveformDesign(s_p, s_i, rho=max(rho, 0.0)),
                     rho_bar=(1 - max(rho, 0.0)) * (1 - 1e-12))


INIT_STRATEGIES = {"matched": _init_matched, "waterfilling": _init_waterfilling}


def _strictly_feasible(sp: SwiptProblem, pt: dict[str, float], rate_floor: float) -> bool:
    if any(not v > FLOOR for v in pt.values()):
        return False
    if sp.power.evaluate(pt) >= 1:
        return False
    if sp.layout.fixed_rho is None and pt["rho"] + pt["rhobar"] >= 1:
        return False
    if rate_floor > 0 and sp.solved_rate(pt) <= rate_floor:
        return False
    return True


# -- the successive condensation loop ----------------------------------------

def optimize_waveform(channel: FrequencyResponse, rect: RectennaParams, noise: NoiseProfile,
                      budget: PowerBudget, config: OptimizationConfig = OptimizationConfig(),
                      *, layout: Layout | None = None,
                      initial: WaveformDesign | None = None) -> OptimizedDesign:
    """Maximize the DC output subject to the power budget and the rate floor.

    Phases stay matched to the channel throughout. Iterates until the
    relative change of the DC output falls below ``config.epsilon``, a GP
    step fails to raise it (the step is then discarded), or
    ``config.i_max`` GPs have been solved, and returns the best iterate.
    ``trajectory`` holds the start and every accepted iterate.

    Raises:
        InfeasibleRateError: if the rate floor exceeds the water-filling rate.
    """
    sp = SwiptProblem(channel, rect, noise, budget, layout)
    lay = sp.layout
    r_max = max_rate(channel, noise, budget, lay)
    floor = config.rate_floor
    if floor > 0 and floor > r_max * (1 + 1e-12):
        raise InfeasibleRateError(floor, r_max)
    floor_eff = min(floor, r_max * RATE_CAP)

    x = None
    if initial is not None:
        cand = lay.point(initial, rho_bar=(1 - initial.rho) * (1 - 1e-12))
        if _strictly_feasible(sp, cand, floor_eff):
            x = cand
    if x is None:
        x = INIT_STRATEGIES[config.init_strategy](sp, floor_eff)
        if not _strictly_feasible(sp, x, floor_eff):
            x = _init_waterfilling(sp, floor_eff)

    z = sp.zdc(x)
    trajectory = [z]
    rates = [sp.solved_rate(x)]
    powers = [sp.power_of(x)]
    best_x, best_z = x, z
    status = "max-iterations"
    iterations = 0
    for it in range(1, config.i_max + 1):
        problem = sp.condensed_gp(x, floor_eff)
        start = {k: v for k, v in x.items() if k in problem.variables}
        start["t0"] = 0.5 * z
        sol = solve_gp(problem, start, tol=config.gp_tol, max_iter=config.gp_max_iter)
        iterations = it
        if sol.status is GpStatus.INFEASIBLE:
            log.warning("condensed GP infeasible at iteration %d", it)
            status = "infeasible" if it == 1 else status
            break
        x_new = sp.complete(sol.values)
        z_new = sp.zdc(x_new)
        if z_new < z:
            # The anchor is feasible for its own condensed GP, so an exact
            # solve never lowers z_DC; a drop means the GP stopped short
            # (typically near the top rate floor, where rho is pinned near
            # zero). No further ascent is available at solver precision.
            log.debug("iteration %d lowered z_DC by %.1e relative (GP %s); stopping",
                      it, (z - z_new) / z, sol.status.value)
            iterations = it - 1
            status = "converged"
            break
        trajectory.append(z_new)
        rates.append(sp.solved_rate(x_new))
        powers.append(sp.power_of(x_new))
        if z_new > best_z:
            best_x, best_z = x_new, z_new
        done = abs(z_new - z) < config.epsilon * max(abs(z), np.finfo(float).tiny)
        x, z = x_new, z_new
        if done:
            status = "converged"
            break

    design = lay.design(best_x, channel)
    rho_bar = lay.rho_bar(best_x)
    return OptimizedDesign(
        design=design,
        zdc=float(zdc_matched(design.s_p, design.s_i, design.rho, sp.A, rect)),
        rate=float(sp.solved_rate(best_x)) if lay.info_wave else 0.0,
        iterations=iterations,
        trajectory=trajectory,
        status=status,
        rate_floor=floor,
        rho_bar=rho_bar,
        power=average_power(design),
        rate_audit=float(rate(design.s_i, design.rho, sp.A, sp.sigma2)),
        iterate_rates=rates,
        iterate_powers=powers,
    )


def wpt_only(channel: FrequencyResponse, rect: RectennaParams, budget: PowerBudget,
             config: OptimizationConfig = OptimizationConfig()) -> OptimizedDesign:
    """Multisine-only optimum: no OFDM waveform and everything routed to the harvester."""
    lay = Layout(channel.num_tones, channel.num_antennas, info_wave=False, fixed_rho=1.0)
    noise = NoiseProfile.uniform(1.0, channel.num_tones)
    return optimize_waveform(channel, rect, noise, budget, replace(config, rate_floor=0.0),
                             layout=lay)


# -- region sweep ------------------------------------------------------------

def default_rate_grid(channel, noise, budget, points: int = 20, layout: Layout | None = None):
    return np.linspace(0.0, max_rate(channel, noise, budget, layout), points)


def _sweep_point(args) -> RateEnergyPoint:
    channel, rect, noise, budget, config, layout, r, initial = args
    try:
        res = optimize_waveform(channel, rect, noise, budget, replace(config, rate_floor=float(r)),
                                layout=layout, initial=initial)
    except InfeasibleRateError:
        return RateEnergyPoint(float(r), float("nan"), float("nan"), float("nan"), 0,
                               "infeasible", channel.num_tones)
    return RateEnergyPoint(float(r), res.rate, res.zdc, res.design.rho, res.iterations,
                           res.status, channel.num_tones, res)


SWEEP_MODES = ("bidirectional", "chained", "independent")


def _chain(args_common, grid, warm_start: bool) -> list[RateEnergyPoint]:
    channel, rect, noise, budget, config, layout = args_common
    points = []
    prev = None
    for r in grid:
        initial = prev.result.design if (warm_start and prev is not None) else None
        pt = _sweep_point((channel, rect, noise, budget, config, layout, r, initial))
        points.append(pt)
        if pt.result is not None:
            prev = pt
    return points


def _better(a: RateEnergyPoint, b: RateEnergyPoint) -> RateEnergyPoint:
    if a.result is None:
        return b
    if b.result is None:
        return a
    return b if b.zdc > a.zdc else a


def sweep_region(channel: FrequencyResponse, rect: RectennaParams, noise: NoiseProfile,
                 budget: PowerBudget, rate_grid: Sequence[float] | None = None,
                 config: OptimizationConfig = OptimizationConfig(), *,
                 layout: Layout | None = None, mode: str = "bidirectional",
                 workers: int | None = None) -> list[RateEnergyPoint]:
    """Boundary points of the rate-energy region, one per rate floor, sorted by rate.

    Modes:
        ``chained``: ascending rate order, each point warm-started from the
        previous solution when that solution already clears the new floor.
        ``bidirectional``: the chained sweep plus a descending chain started
        from the maximum-rate end, keeping the better design per point. The
        descending chain follows the branch where the multisine is nearly
        off, which the ascending chain can miss since each run only finds a
        local optimum.
        ``independent``: every point from the default initializer, run in a
        process pool when ``workers > 1``.

    Infeasible floors come back flagged rather than aborting the sweep.
    """
    if mode not in SWEEP_MODES:
        raise ValueError(f"unknown sweep mode {mode!r}; choose from {SWEEP_MODES}")
    grid = (default_rate_grid(channel, noise, budget, layout=layout) if rate_grid is None
            else np.sort(np.asarray(rate_grid, dtype=float)))
    common = (channel, rect, noise, budget, config, layout)
    if mode == "independent":
        jobs = [common + (r, None) for r in grid]
        if workers and workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                points = list(pool.map(_sweep_point, jobs))
        else:
            points = [_sweep_point(job) for job in jobs]
    else:
        points = _chain(common, grid, warm_start=True)
        if mode == "bidirectional" and len(grid) > 1:
            down = _chain(common, grid[::-1], warm_start=True)[::-1]
            points = [_better(a, b) for a, b in zip(points, down)]
    return sorted(points, key=lambda p: (np.nan_to_num(p.rate, nan=-1.0), p.rate_floor))


# -- brute-force oracle ------------------------------------------------------

@dataclass
class BruteForceResult:
    design: WaveformDesign
    zdc: float
    rate: float


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([[total]])
    rows = []
    for first in range(total + 1):
        rest = _compositions(total - first, parts - 1)
        rows.append(np.hstack([np.full((rest.shape[0], 1), first), rest]))
    return np.vstack(rows)


def brute_force(channel: FrequencyResponse, rect: RectennaParams, noise: NoiseProfile,
                budget: PowerBudget, rate_floor: float, grid_resolution: float = 1e-2,
                layout: Layout | None = None) -> BruteForceResult | None:
    """Grid search over power splits on the budget simplex and ``rho`` in (0, 1).

    Each amplitude gets a power share that is a multiple of
    ``grid_resolution``; ``rho`` runs over the interior multiples of the
    same step (or stays at ``layout.fixed_rho``). Returns ``None`` when no
    grid point meets the rate floor. Meant for ``N*M <= 2``.
    """
    N, M = channel.shape
    lay = layout or Layout(N, M)
    A = channel.amplitudes
    sigma2 = noise.per_tone(N)
    steps = int(round(1 / grid_resolution))
    nwaves = int(lay.power_wave) + int(lay.info_wave)
    frac = _compositions(steps, nwaves * N * M) / steps
    amps = np.sqrt(2 * budget.p * frac).reshape(-1, nwaves, N, M)
    zeros = np.zeros((amps.shape[0], N, M))
    s_p = amps[:, 0] if lay.power_wave else zeros
    s_i = amps[:, -1] if lay.info_wave else zeros
    rhos = [lay.fixed_rho] if lay.fixed_rho is not None else np.arange(1, steps) / steps

    best = None
    for r in rhos:
        z = zdc_matched(s_p, s_i, r, A, rect)
        rt = rate(s_i, np.full(s_i.shape[0], r), A, sigma2)
        ok = rt >= rate_floor
        if not np.any(ok):
            continue
        k = int(np.argmax(np.where(ok, z, -np.inf)))
        if best is None or z[k] > best[0]:
            best = (float(z[k]), float(rt[k]), k, float(r))
    if best is None:
        return None
    z, rt, k, r = best
    phi_p, phi_i = matched_phases(channel)
    return BruteForceResult(WaveformDesign(s_p[k], s_i[k], phi_p, phi_i, r), z, rt)
