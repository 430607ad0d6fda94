"""Frequency-domain solution for static single-line comb chains.

Each static unmagnetized target multiplies a frequency component omega
(decay-rate units) by exp(-2i*xi / (omega - delta + i/2)).  Expanding the
Gaussian input in a Fourier series over a window of length twice the half
period turns propagation into a per-mode product of those factors, which is
exact up to series truncation and windowing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import FE57, PhysConstants
from .errors import AnalyticDomainError
from .metrics import EchoReport
from .metrics import report as metrics_report
from .model import CombSystem, PulseSpec, build_shaped_comb
from .trace import FieldTrace, sample_pulse


def closed_form_efficiency(xi_bar: float, s: float) -> float:
    """First-echo efficiency of a wide flat comb.

    16*pi^2*xi_bar^2 * exp(-2*pi*(2*xi_bar + 1)/s) / s^2, valid when the
    comb spans the pulse bandwidth; it approaches 4*exp(-2) ~ 54% for large
    xi_bar and s.
    """
    if xi_bar < 0:
        raise ValueError(f"resonant thickness must be >= 0, got {xi_bar}")
    if s <= 0:
        raise ValueError(f"comb spacing must be positive, got {s}")
    return (
        16.0
        * math.pi**2
        * xi_bar**2
        * math.exp(-2.0 * math.pi * (2.0 * xi_bar + 1.0) / s)
        / s**2
    )


def target_transfer(omega, xi: float, delta: float):
    """Complex transmission factor of one single-line static target.

    omega and delta are in decay-rate units; the magnitude never exceeds 1
    on the real axis since the pole sits at delta - i/2.
    """
    if xi < 0:
        raise ValueError(f"resonant thickness must be >= 0, got {xi}")
    omega = np.asarray(omega, dtype=complex)
    out = np.exp(-2j * xi / (omega - delta + 0.5j))
    return out if out.ndim else complex(out)


def _require_series_domain(comb: CombSystem):
    if not comb.is_static:
        raise AnalyticDomainError("series solution requires stationary targets")
    if not comb.is_single_line:
        raise AnalyticDomainError("series solution requires unmagnetized targets")


@dataclass(frozen=True)
class SeriesConfig:
    """Fourier-series window and truncation.

    half_period     half of the periodic window, ns; the window must cover
                    the full output signal of interest
    l_max           modes -l_max..l_max are kept
    truncation_tol  bound on the neglected Gaussian mode amplitudes
    """

    half_period: float
    l_max: int
    truncation_tol: float = 1e-12

    def __post_init__(self):
        if self.half_period <= 0:
            raise ValueError(f"half period must be positive, got {self.half_period}")
        if self.l_max < 1:
            raise ValueError(f"mode cutoff must be >= 1, got {self.l_max}")

    @classmethod
    def for_pulse(
        cls,
        pulse: PulseSpec,
        s: float,
        constants: PhysConstants = FE57,
        truncation_tol: float = 1e-12,
        half_period: float | None = None,
    ) -> "SeriesConfig":
        """Window covering pulse, first echo and a guard band.

        The cutoff makes the first neglected mode amplitude fall below
        truncation_tol relative to the pulse peak.
        """
        if half_period is None:
            echo_delay = 2.0 * math.pi / (s * constants.gamma)
            half_period = pulse.tau_i + 3.0 * echo_delay + 6.0 * pulse.tau_p
        l_max = math.ceil(
            (2.0 * half_period / (math.pi * pulse.tau_p))
            * math.sqrt(math.log(1.0 / truncation_tol))
        )
        return cls(half_period=half_period, l_max=l_max, truncation_tol=truncation_tol)


def _mode_table(pulse: PulseSpec, comb: CombSystem, cfg: SeriesConfig, constants: PhysConstants):
    """Mode indices and output amplitudes A_l (time phase excluded)."""
    _require_series_domain(comb)
    t_half = cfg.half_period
    l = np.arange(-cfg.l_max, cfg.l_max + 1)
    coeff = (
        pulse.omega0
        * math.sqrt(math.pi)
        * pulse.tau_p
        / (2.0 * t_half)
        * np.exp(-((l * math.pi * pulse.tau_p / (2.0 * t_half)) ** 2))
    )
    omega = -l * math.pi / (t_half * constants.gamma)  # decay-rate units
    exponent = np.zeros(l.size, dtype=complex)
    for target in comb.targets:
        exponent += -2j * target.xi / (omega - target.doppler_static + 0.5j)
    return l, coeff * np.exp(exponent)


def echo_field_series(
    t,
    pulse: PulseSpec,
    comb: CombSystem,
    cfg: SeriesConfig | None = None,
    constants: PhysConstants = FE57,
):
    """Output envelope of the chain at time t (scalar or array)."""
    if cfg is None:
        cfg = SeriesConfig.for_pulse(pulse, comb.spacing, constants)
    l, amps = _mode_table(pulse, comb, cfg, constants)
    t = np.asarray(t, dtype=float)
    phase = np.exp(
        1j * np.multiply.outer(t - pulse.tau_i, l * math.pi / cfg.half_period)
    )
    out = phase @ amps
    return out if out.ndim else complex(out)


def series_trace(
    pulse: PulseSpec,
    comb: CombSystem,
    cfg: SeriesConfig | None = None,
    dt_target: float | None = None,
    constants: PhysConstants = FE57,
) -> FieldTrace:
    """Output envelope sampled over one periodic window [0, 2T).

    Evaluates the series with an inverse FFT on a power-of-two grid no
    coarser than dt_target (default tau_p / 40).
    """
    if cfg is None:
        cfg = SeriesConfig.for_pulse(pulse, comb.spacing, constants)
    if dt_target is None:
        dt_target = pulse.tau_p / 40.0
    l, amps = _mode_table(pulse, comb, cfg, constants)
    span = 2.0 * cfg.half_period
    n = 1 << max(math.ceil(math.log2(span / dt_target)), math.ceil(math.log2(l.size + 1)))
    dt = span / n
    bins = np.zeros(n, dtype=complex)
    shifted = amps * np.exp(-1j * l * math.pi * pulse.tau_i / cfg.half_period)
    bins[l % n] = shifted
    samples = n * np.fft.ifft(bins)
    return FieldTrace(0.0, dt, samples)


def windowed_report(
    pulse: PulseSpec,
    comb: CombSystem,
    cfg: SeriesConfig | None = None,
    dt_target: float | None = None,
    constants: PhysConstants = FE57,
    shift_mode: str = "auto",
) -> EchoReport:
    """Series output run through echo detection and the energy metrics."""
    out = series_trace(pulse, comb, cfg, dt_target, constants)
    inp = sample_pulse(pulse, out.t_start, out.dt, out.n)
    return metrics_report(inp, out, pulse, comb, constants, shift_mode=shift_mode)


def shaped_comb_report(
    k: float,
    total_xi: float,
    pulse: PulseSpec,
    s: float,
    m: int,
    constants: PhysConstants = FE57,
    dt_target: float | None = None,
) -> EchoReport | None:
    """Echo report of one shaped comb, or None when no echo is emitted."""
    from .errors import EchoDetectionError

    comb = build_shaped_comb(m, s, k, pulse.tau_p, total_xi, constants)
    try:
        return windowed_report(pulse, comb, dt_target=dt_target, constants=constants)
    except EchoDetectionError:
        return None


def efficiency_map(
    k_grid,
    xi_grid,
    pulse: PulseSpec,
    s: float,
    m: int,
    constants: PhysConstants = FE57,
    dt_target: float | None = None,
) -> np.ndarray:
    """Echo efficiency over a (k, total xi) grid of shaped combs.

    Cells whose comb emits no detectable echo (total xi of zero) are 0.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    xi_grid = np.asarray(xi_grid, dtype=float)
    if k_grid.size == 0 or xi_grid.size == 0:
        raise ValueError("efficiency map needs non-empty grids")
    out = np.zeros((k_grid.size, xi_grid.size))
    for i, k in enumerate(k_grid):
        for j, xi in enumerate(xi_grid):
            rep = shaped_comb_report(float(k), float(xi), pulse, s, m, constants, dt_target)
            out[i, j] = 0.0 if rep is None else rep.efficiency
    return out
