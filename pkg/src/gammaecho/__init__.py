"""Gamma-ray echo simulation for nuclear frequency comb systems.

A nuclear frequency comb is a chain of resonant absorber targets whose
absorption lines, offset by Doppler shifts and hyperfine splittings, form
an equally spaced spectrum.  A short pulse sent through the chain is
partially stored and re-emitted as a delayed echo.  The package provides a
frequency-series solution for static combs, a time-domain solver for
arbitrarily moving targets, echo metrics, the figure-level parameter scans
and a command line front end.
"""

__version__ = "0.1.0"

from .analytic import (
    SeriesConfig,
    closed_form_efficiency,
    echo_field_series,
    efficiency_map,
    series_trace,
    target_transfer,
    windowed_report,
)
from .constants import FE57, PhysConstants
from .errors import (
    AnalyticDomainError,
    ConfigError,
    ConvergenceError,
    EchoDetectionError,
    GammaEchoError,
    GridResolutionError,
)
from .metrics import (
    EchoReport,
    EchoWindow,
    detect_window,
    efficiency,
    expected_echo_time,
    fidelity,
    report,
)
from .model import (
    CombSystem,
    MotionProfile,
    PulseSpec,
    TargetSpec,
    build_dynamical_doppler,
    build_dynamical_hybrid,
    build_flat_comb,
    build_shaped_comb,
    default_arrival_time,
    doppler_shift_at,
    shaped_weights,
    terminal_velocity,
)
from .solver import (
    Grid,
    auto_grid,
    convergence_study,
    propagate_target,
    simulate_chain,
)
from .trace import FieldTrace, sample_pulse

__all__ = [
    "FE57",
    "PhysConstants",
    "MotionProfile",
    "TargetSpec",
    "CombSystem",
    "PulseSpec",
    "FieldTrace",
    "Grid",
    "SeriesConfig",
    "EchoReport",
    "EchoWindow",
    "GammaEchoError",
    "ConfigError",
    "AnalyticDomainError",
    "GridResolutionError",
    "EchoDetectionError",
    "ConvergenceError",
    "shaped_weights",
    "doppler_shift_at",
    "terminal_velocity",
    "build_flat_comb",
    "build_shaped_comb",
    "build_dynamical_hybrid",
    "build_dynamical_doppler",
    "default_arrival_time",
    "sample_pulse",
    "closed_form_efficiency",
    "target_transfer",
    "echo_field_series",
    "series_trace",
    "windowed_report",
    "efficiency_map",
    "expected_echo_time",
    "detect_window",
    "efficiency",
    "fidelity",
    "report",
    "auto_grid",
    "propagate_target",
    "simulate_chain",
    "convergence_study",
]
