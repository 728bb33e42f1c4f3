"""Analytic rectenna DC output and information rate.

The rectenna is the 2nd+4th order Taylor model: the DC output is
proportional to ``k2*rho*R*E[A{y^2}] + k4*rho^2*R^2*E[A{y^4}]`` where
``A{.}`` is the time average over a symbol and the expectation is over
the Gaussian OFDM symbols. All evaluators broadcast over leading axes,
so amplitude arrays may have shape ``(..., N, M)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .channel import FrequencyResponse, InvalidScenarioError


@dataclass(frozen=True)
class RectennaParams:
    k2: float = 0.0034
    k4: float = 0.3829
    r_ant: float = 50.0

    def __post_init__(self):
        for name in ("k2", "k4", "r_ant"):
            if not getattr(self, name) > 0:
                raise InvalidScenarioError(f"rectenna {name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class DiodeParams:
    i_s: float
    a: float = 0.0
    n_ideality: float = 1.05
    v_t: float = 25.85e-3

    def __post_init__(self):
        for name in ("i_s", "n_ideality", "v_t"):
            if not getattr(self, name) > 0:
                raise InvalidScenarioError(f"diode {name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class NoiseProfile:
    sigma2: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma2, dtype=float).reshape(-1)
        if s.size == 0 or not np.all(s > 0):
            raise InvalidScenarioError("noise powers must all be > 0")
        s.setflags(write=False)
        object.__setattr__(self, "sigma2", s)

    @classmethod
    def uniform(cls, sigma2: float, num_tones: int) -> "NoiseProfile":
        return cls(np.full(num_tones, float(sigma2)))

    def per_tone(self, num_tones: int) -> np.ndarray:
        if self.sigma2.size == 1:
            return np.full(num_tones, self.sigma2[0])
        if self.sigma2.size != num_tones:
            raise ValueError(f"noise profile has {self.sigma2.size} tones, expected {num_tones}")
        return self.sigma2


def k_coefficients(diode: DiodeParams) -> tuple[float, float]:
    """Taylor coefficients ``k_i = i_s exp(a/(n v_t)) / (i! (n v_t)^i)`` for i = 2, 4."""
    nvt = diode.n_ideality * diode.v_t
    scale = diode.i_s * np.exp(diode.a / nvt)
    return (float(scale / (factorial(2) * nvt ** 2)),
            float(scale / (factorial(4) * nvt ** 4)))


@lru_cache(maxsize=64)
def quadruples(num_tones: int) -> np.ndarray:
    """All ``(n0, n1, n2, n3)`` with ``n0 + n1 == n2 + n3``, shape (Q, 4)."""
    n = np.arange(num_tones)
    n0, n1, n2 = np.meshgrid(n, n, n, indexing="ij")
    n3 = n0 + n1 - n2
    ok = (n3 >= 0) & (n3 < num_tones)
    out = np.stack([n0[ok], n1[ok], n2[ok], n3[ok]], axis=1)
    out.setflags(write=False)
    return out


def _tone_phasors(s, psi, A):
    s = np.asarray(s, dtype=float)
    A = np.asarray(A, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if s.shape[-2:] != A.shape[-2:] or psi.shape[-2:] != A.shape[-2:]:
        raise ValueError(f"shape mismatch: amplitudes {s.shape}, phases {psi.shape}, channel {A.shape}")
    # Received complex amplitude per tone, summed over transmit antennas.
    return np.sum(s * A * np.exp(1j * psi), axis=-1)


def yP2(s_p, psi_p, A) -> np.ndarray:
    """Time average of ``y_P(t)^2`` for a multisine with received phases ``psi_p``."""
    c = _tone_phasors(s_p, psi_p, A)
    return 0.5 * np.sum(np.abs(c) ** 2, axis=-1)


def yP4(s_p, psi_p, A) -> np.ndarray:
    """Time average of ``y_P(t)^4``: 3/8 of the sum over frequency-matched quadruples."""
    c = _tone_phasors(s_p, psi_p, A)
    q = quadruples(c.shape[-1])
    prod = c[..., q[:, 0]] * c[..., q[:, 1]] * np.conj(c[..., q[:, 2]] * c[..., q[:, 3]])
    return 0.375 * np.sum(prod.real, axis=-1)


def yI2(s_i, psi_i, A) -> np.ndarray:
    """Symbol-averaged ``A{y_I(t)^2}``; same form as the multisine term."""
    return yP2(s_i, psi_i, A)


def yI4(s_i, psi_i, A) -> np.ndarray:
    """Symbol-averaged ``A{y_I(t)^4}`` for complex Gaussian inputs.

    Only tone pairs ``{n0, n1}`` survive the expectation, and the single-tone
    terms pick up the Gaussian fourth-moment factor ``E|x|^4 = 2 P^2``, which
    gives 6/8 times the square of the per-tone received power sum.
    """
    c = _tone_phasors(s_i, psi_i, A)
    p = np.abs(c) ** 2
    return 0.75 * np.sum(p, axis=-1) ** 2


def zdc(design, channel: FrequencyResponse, rect: RectennaParams) -> float:
    """DC-output proxy for an arbitrary-phase design."""
    A = channel.amplitudes
    psi_p = design.phi_p + channel.phases
    psi_i = design.phi_i + channel.phases
    rho = design.rho
    a2 = yP2(design.s_p, psi_p, A)
    b2 = yI2(design.s_i, psi_i, A)
    k2r = rect.k2 * rho * rect.r_ant
    k4r = rect.k4 * rho ** 2 * rect.r_ant ** 2
    return float(k2r * a2 + k4r * yP4(design.s_p, psi_p, A) + k2r * b2
                 + k4r * yI4(design.s_i, psi_i, A) + 6 * k4r * a2 * b2)


def zdc_matched(s_p, s_i, rho, A, rect: RectennaParams):
    """DC-output proxy with phases matched to the channel (all cosines equal one).

    Works on real amplitudes only: every cross-antenna product enters with
    a plus sign, so the per-tone sums collapse to ``sum_m s[n,m]*A[n,m]``.
    Broadcasts over leading axes of ``s_p``/``s_i`` and ``rho``.
    """
    A = np.asarray(A, dtype=float)
    u = np.sum(np.asarray(s_p, dtype=float) * A, axis=-1)
    v = np.sum(np.asarray(s_i, dtype=float) * A, axis=-1)
    rho = np.asarray(rho, dtype=float)
    q = quadruples(A.shape[0])
    pair_p = np.sum(u * u, axis=-1)
    pair_i = np.sum(v * v, axis=-1)
    quad_p = np.sum(u[..., q[:, 0]] * u[..., q[:, 1]] * u[..., q[:, 2]] * u[..., q[:, 3]], axis=-1)
    R = rect.r_ant
    return (rect.k2 * rho / 2 * R * pair_p
            + 3 * rect.k4 * rho ** 2 / 8 * R ** 2 * quad_p
            + rect.k2 * rho / 2 * R * pair_i
            + 3 * rect.k4 * rho ** 2 / 4 * R ** 2 * pair_i ** 2
            + 3 * rect.k4 * rho ** 2 / 2 * R ** 2 * pair_p * pair_i)


def rate(s_i, rho, A, noise, psi_i=None):
    """Achievable rate in bits per OFDM symbol with perfect multisine cancellation.

    ``psi_i`` are received information phases ``phi_I + psi_bar``; when
    omitted the matched-phase form is used. ``noise`` is a NoiseProfile or
    an array of per-tone noise powers.
    """
    A = np.asarray(A, dtype=float)
    s_i = np.asarray(s_i, dtype=float)
    if psi_i is None:
        C = np.sum(s_i * A, axis=-1) ** 2
    else:
        C = np.abs(_tone_phasors(s_i, psi_i, A)) ** 2
    sigma2 = noise.per_tone(A.shape[0]) if isinstance(noise, NoiseProfile) else np.asarray(noise)
    rho = np.asarray(rho, dtype=float)
    return np.sum(np.log2(1 + (1 - rho)[..., None] * C / sigma2), axis=-1)
