"""Frequency-domain MISO channel built from a tapped multipath description.

Each path carries a delay, a gain, a phase and a departure angle. The
transmit array is a uniform linear array whose first element is the
phase reference, so the per-antenna phase offset of path ``l`` at tone
``n`` is ``2*pi*(m-1)*(d/lambda_n)*cos(theta_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class InvalidScenarioError(ValueError):
    """Raised when a channel or scenario description is unusable."""


@dataclass(frozen=True)
class PathTap:
    delay: float = 0.0
    amplitude: float = 1.0
    phase: float = 0.0
    departure_angle: float = 0.0

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise InvalidScenarioError(f"tap amplitude must be >= 0, got {self.amplitude}")
        if not self.delay >= 0:
            raise InvalidScenarioError(f"tap delay must be >= 0, got {self.delay}")


@dataclass(frozen=True)
class FrequencyGrid:
    """``num_tones`` tones at ``f0 + n*delta_f``; ``f0`` is the lowest tone."""

    f0: float
    delta_f: float
    num_tones: int

    def __post_init__(self):
        if not self.delta_f > 0:
            raise InvalidScenarioError(f"delta_f must be > 0, got {self.delta_f}")
        if int(self.num_tones) != self.num_tones or self.num_tones < 1:
            raise InvalidScenarioError(f"num_tones must be a positive integer, got {self.num_tones}")
        if not self.f0 >= 0:
            raise InvalidScenarioError(f"f0 must be >= 0, got {self.f0}")

    @classmethod
    def centered(cls, center: float, delta_f: float, num_tones: int) -> "FrequencyGrid":
        return cls(center - (num_tones - 1) * delta_f / 2, delta_f, num_tones)

    @property
    def frequencies(self) -> np.ndarray:
        return self.f0 + self.delta_f * np.arange(self.num_tones)

    @property
    def angular(self) -> np.ndarray:
        return 2 * np.pi * self.frequencies

    @property
    def wavelengths(self) -> np.ndarray:
        return SPEED_OF_LIGHT / self.frequencies

    @property
    def symbol_duration(self) -> float:
        return 1.0 / self.delta_f


@dataclass(frozen=True)
class ArrayGeometry:
    num_antennas: int = 1
    element_spacing: float = 0.0

    def __post_init__(self):
        if int(self.num_antennas) != self.num_antennas or self.num_antennas < 1:
            raise InvalidScenarioError(
                f"num_antennas must be a positive integer, got {self.num_antennas}")
        if self.num_antennas > 1 and not self.element_spacing > 0:
            raise InvalidScenarioError("element_spacing must be > 0 for more than one antenna")


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex gains ``h[n, m]`` for tone ``n`` and transmit antenna ``m``."""

    gains: np.ndarray

    def __post_init__(self):
        g = np.array(self.gains, dtype=complex)
        if g.ndim != 2:
            raise InvalidScenarioError(f"gains must be an N x M matrix, got shape {g.shape}")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @classmethod
    def from_polar(cls, amplitudes, phases) -> "FrequencyResponse":
        return cls(np.asarray(amplitudes) * np.exp(1j * np.asarray(phases)))

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.gains)

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.gains)

    @property
    def shape(self) -> tuple[int, int]:
        return self.gains.shape

    @property
    def num_tones(self) -> int:
        return self.gains.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.gains.shape[1]

    def row_norms(self) -> np.ndarray:
        """``||h_n||`` per tone."""
        return np.linalg.norm(self.gains, axis=1)


def array_phase(grid: FrequencyGrid, geometry: ArrayGeometry, angles) -> np.ndarray:
    """ULA phase offsets with shape (N, M, L); antenna 0 is always zero."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    m = np.arange(geometry.num_antennas)
    d_over_lambda = geometry.element_spacing / grid.wavelengths
    return (2 * np.pi * d_over_lambda[:, None, None] * m[None, :, None]
            * np.cos(angles)[None, None, :])


def frequency_response(taps: Sequence[PathTap], grid: FrequencyGrid,
                       geometry: ArrayGeometry) -> FrequencyResponse:
    """Sum of path contributions ``alpha_l * exp(j(-w_n tau_l + Delta_nml + xi_l))``."""
    if len(taps) == 0:
        raise InvalidScenarioError("at least one path tap is required")
    alpha = np.array([t.amplitude for t in taps])
    tau = np.array([t.delay for t in taps])
    xi = np.array([t.phase for t in taps])
    delta = array_phase(grid, geometry, [t.departure_angle for t in taps])
    arg = -grid.angular[:, None, None] * tau[None, None, :] + delta + xi[None, None, :]
    return FrequencyResponse(np.sum(alpha * np.exp(1j * arg), axis=2))


def flat_channel(grid: FrequencyGrid, geometry: ArrayGeometry) -> FrequencyResponse:
    """Unit gain on every tone and antenna."""
    return FrequencyResponse(np.ones((grid.num_tones, geometry.num_antennas), dtype=complex))
