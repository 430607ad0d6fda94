"""Uniformly sampled complex field envelopes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PulseSpec


@dataclass(frozen=True)
class FieldTrace:
    """Complex Rabi-frequency envelope on a uniform time grid.

    t_start  time of the first sample, ns
    dt       sample spacing, ns
    samples  complex amplitudes in the input pulse's units
    """

    t_start: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if self.dt <= 0:
            raise ValueError(f"sample spacing must be positive, got {self.dt}")
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("trace needs a 1-d array of at least two samples")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples.view(float))))

    def index_at(self, t: float) -> int:
        """Nearest sample index for time t, clipped to the trace."""
        i = int(round((t - self.t_start) / self.dt))
        return min(max(i, 0), self.n - 1)

    def energy(self, i0: int = 0, i1: int | None = None) -> float:
        """Trapezoidal integral of |samples|^2 over sample range [i0, i1]."""
        i1 = self.n - 1 if i1 is None else i1
        if i1 <= i0:
            return 0.0
        chunk = self.intensity[i0 : i1 + 1]
        return float(self.dt * (chunk.sum() - 0.5 * (chunk[0] + chunk[-1])))

    def scaled(self, factor: complex) -> "FieldTrace":
        return FieldTrace(self.t_start, self.dt, factor * self.samples)


def sample_pulse(pulse: PulseSpec, t_start: float, dt: float, n: int) -> FieldTrace:
    """Sample the input envelope on a uniform grid."""
    t = t_start + dt * np.arange(n)
    return FieldTrace(t_start, dt, pulse.envelope(t))
