"""Time-domain Monte-Carlo check of the analytic DC-output expressions.

The received signal is synthesized sample by sample, raised to the 2nd
and 4th power, time-averaged over one symbol and then averaged over
random Gaussian symbol draws. Simulating the real 5 GHz passband is
pointless, so tones are moved to a surrogate carrier ``K * delta_f``
with integer ``K >= 4N``: every tone is then a harmonic of ``delta_f``,
the waveform is periodic over one symbol, and with ``16 (K + N)``
samples per period the sample mean of any 4th-degree product of tones
equals its time average exactly. Channel gains are still taken at the
true tone frequencies.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .channel import ArrayGeometry, FrequencyGrid, PathTap, frequency_response
from .harvester import RectennaParams
from .waveform import WaveformDesign

DEFAULT_BATCH = 1000


class OracleConfigError(ValueError):
    """Sampling setup that would not give exact periodic averages."""


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    stderr: float

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - target) <= sigmas * self.stderr


@dataclass
class OracleReport:
    estimate: float
    stderr: float
    num_symbols: int
    seed: int
    surrogate_k: int
    samples_per_period: int
    sampling_rate_hz: float
    cross_terms: dict[str, MeanEstimate] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cross_terms"] = {k: asdict(v) for k, v in self.cross_terms.items()}
        return d


def _sampling(num_tones: int, surrogate_k: int | None, samples_per_period: int | None):
    k = 4 * num_tones if surrogate_k is None else int(surrogate_k)
    if k != surrogate_k and surrogate_k is not None:
        raise OracleConfigError(f"surrogate carrier index must be an integer, got {surrogate_k}")
    if k < 4 * num_tones:
        raise OracleConfigError(f"surrogate carrier index {k} is below 4N = {4 * num_tones}")
    top = k + num_tones - 1
    s = 16 * (k + num_tones) if samples_per_period is None else int(samples_per_period)
    if s <= 8 * top:
        # 4th powers reach 4*top cycles per period; averaging is exact only below Nyquist.
        raise OracleConfigError(f"{s} samples per period cannot resolve 4th-order products "
                                f"up to {4 * top} cycles")
    return k, s


def monte_carlo_zdc(design: WaveformDesign, taps: Sequence[PathTap], geometry: ArrayGeometry,
                    grid: FrequencyGrid, rect: RectennaParams, num_symbols: int, seed: int,
                    *, surrogate_k: int | None = None, samples_per_period: int | None = None,
                    periods: float = 1, batch_size: int = DEFAULT_BATCH) -> OracleReport:
    """Monte-Carlo estimate of the symbol-averaged DC output.

    Symbols are drawn in fixed-size batches, each from its own generator
    spawned off ``seed``, so the result does not depend on evaluation order.
    Besides the DC output the report carries the per-symbol time averages of
    ``y_P*y_I``, ``y_P^3*y_I`` and ``y_P*y_I^3``, which should average to zero.
    """
    if num_symbols < 1:
        raise ValueError("num_symbols must be >= 1")
    if periods <= 0 or periods != int(periods):
        raise OracleConfigError(f"averaging window must span a whole number of periods, got {periods}")
    n, m = design.shape
    if grid.num_tones != n or geometry.num_antennas != m:
        raise ValueError(f"design is {n}x{m} but scenario is {grid.num_tones}x{geometry.num_antennas}")
    k, s = _sampling(n, surrogate_k, samples_per_period)

    h = frequency_response(taps, grid, geometry).gains
    c_p = np.sum(h * design.s_p * np.exp(1j * design.phi_p), axis=1)
    # Unit-power symbols; the amplitude split sqrt(P_I,n)*|w| is then |w| = s_I.
    c_i = np.sum(h * design.s_i * np.exp(1j * design.phi_i), axis=1)

    samples = int(s * periods)
    cycles = k + np.arange(n)
    phase = 2 * np.pi * np.outer(cycles, np.arange(samples)) / s
    basis = np.exp(1j * phase)
    y_p = (c_p @ basis).real

    a2 = rect.k2 * design.rho * rect.r_ant
    a4 = rect.k4 * design.rho ** 2 * rect.r_ant ** 2
    n_batches = -(-num_symbols // batch_size)
    seeds = np.random.SeedSequence(seed).spawn(n_batches)
    chunks = []
    for b, ss in enumerate(seeds):
        size = min(batch_size, num_symbols - b * batch_size)
        rng = np.random.default_rng(ss)
        x = (rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))) / np.sqrt(2)
        y_i = ((x * c_i) @ basis).real
        y = y_p + y_i
        y2 = y * y
        chunks.append(np.stack([
            np.mean(a2 * y2 + a4 * y2 * y2, axis=1),
            np.mean(y_p * y_i, axis=1),
            np.mean(y_p ** 3 * y_i, axis=1),
            np.mean(y_p * y_i ** 3, axis=1),
        ], axis=1))
    per_symbol = np.concatenate(chunks, axis=0)
    means = per_symbol.mean(axis=0)
    if num_symbols > 1:
        errs = per_symbol.std(axis=0, ddof=1) / np.sqrt(num_symbols)
    else:
        errs = np.zeros(4)
    labels = ("yp_yi", "yp3_yi", "yp_yi3")
    return OracleReport(
        estimate=float(means[0]), stderr=float(errs[0]), num_symbols=int(num_symbols),
        seed=int(seed), surrogate_k=k, samples_per_period=s,
        sampling_rate_hz=float(s * grid.delta_f),
        cross_terms={lab: MeanEstimate(float(mu), float(se))
                     for lab, mu, se in zip(labels, means[1:], errs[1:])},
    )
