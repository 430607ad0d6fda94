"""Time-domain integration of a pulse through a chain of targets.

The field transit time through each target is negligible against the ns
dynamics, so the propagation equation is integrated in the retarded frame:
depth reduces to a normalized coordinate on [0, 1] per target and only the
product of decay rate and resonant thickness enters the coupling.  Within
each depth slab the two coherences are advanced over the full time grid by
an exact integrating factor with the detuning sampled at step midpoints and
a trapezoidal drive; the field advances in depth with a Heun step.  The
scheme is second order in both the time step and the slab width.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import FE57, PhysConstants
from .errors import ConvergenceError, EchoDetectionError, GridResolutionError
from .metrics import _window_indices, detect_window, expected_echo_time
from .model import CombSystem, PulseSpec, TargetSpec
from .trace import FieldTrace, sample_pulse

# default resolution: samples per pulse width and per detuning cycle
_PULSE_SAMPLES = 40
_CYCLE_SAMPLES = 16
_MIN_PULSE_SAMPLES = 16
_MIN_CYCLE_SAMPLES = 8
DEFAULT_NZ = 32


@dataclass(frozen=True)
class Grid:
    """Uniform integration lattice: time window, step and slabs per target."""

    t0: float
    t1: float
    dt: float
    nz: int = DEFAULT_NZ

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if self.nz < 1:
            raise ValueError(f"slab count must be >= 1, got {self.nz}")
        if self.t1 <= self.t0:
            raise ValueError("time window is empty")

    @property
    def n(self) -> int:
        return int(math.floor((self.t1 - self.t0) / self.dt + 1e-9)) + 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.t0, self.t1, self.dt / factor, self.nz * factor)


def auto_grid(
    comb: CombSystem,
    pulse: PulseSpec,
    constants: PhysConstants = FE57,
    t1: float | None = None,
    nz: int = DEFAULT_NZ,
) -> Grid:
    """Grid resolving the pulse, the largest detuning and the echo window."""
    if t1 is None:
        echo_delay = 2.0 * math.pi / (comb.spacing * constants.gamma)
        t1 = pulse.tau_i + 3.0 * echo_delay + 6.0 * pulse.tau_p
        for target in comb.targets:
            if target.motion.epsilon != 0:
                ramp_end = 2.0 * target.motion.tau_d + 0.5 * target.motion.b_d
                t1 = max(t1, ramp_end + 6.0 * pulse.tau_p)
    dt = pulse.tau_p / _PULSE_SAMPLES
    d_max = comb.max_abs_detuning(0.0, t1)
    if d_max > 0:
        dt = min(dt, 2.0 * math.pi / (_CYCLE_SAMPLES * d_max * constants.gamma))
    return Grid(0.0, t1, dt, nz)


def _check_resolution(trace_dt: float, target: TargetSpec, grid: Grid, t0: float, t1: float, constants: PhysConstants):
    d_max = target.max_abs_detuning(t0, t1)
    if d_max <= 0:
        return
    min_period = 2.0 * math.pi / (d_max * constants.gamma)
    if trace_dt > min_period / _MIN_CYCLE_SAMPLES:
        raise GridResolutionError(
            f"dt = {trace_dt:.4g} ns resolves less than {_MIN_CYCLE_SAMPLES} samples per "
            f"cycle of the largest detuning ({d_max:.4g} decay rates); "
            f"need dt <= {min_period / _MIN_CYCLE_SAMPLES:.4g} ns"
        )


def coherence_peak(
    trace: FieldTrace, target: TargetSpec, constants: PhysConstants = FE57
) -> float:
    """Largest coherence magnitude a target's entrance face reaches.

    The chain is linear, so absolute amplitudes are arbitrary; this check
    only means something when the trace amplitude is a physical Rabi
    frequency in 1/ns.  Values approaching 1 put the run outside the
    weak-drive regime the equations assume.
    """
    from ._kernel_np import _coherence

    gamma = constants.gamma
    t_mid = trace.times[:-1] + 0.5 * trace.dt
    peak = 0.0
    for detuning in (target.detuning_upper, target.detuning_lower):
        estep = np.exp(-(0.5 * gamma + 1j * gamma * detuning(t_mid)) * trace.dt)
        peak = max(peak, float(np.abs(_coherence(trace.samples, estep, 0.25 * constants.cg, trace.dt)).max()))
        if target.is_single_line:
            break
    return peak


def propagate_target(
    trace: FieldTrace,
    target: TargetSpec,
    grid: Grid,
    constants: PhysConstants = FE57,
    check_perturbative: bool = False,
) -> FieldTrace:
    """Field at the exit face of one target.

    The coherences start from zero at the first sample, so the grid must
    begin before the pulse arrives.  check_perturbative warns when the
    entrance-face coherence exceeds 0.1, which is only meaningful when the
    field amplitude is physical (see coherence_peak).
    """
    if not trace.is_finite():
        raise ValueError("input trace contains non-finite samples")
    _check_resolution(trace.dt, target, grid, trace.t_start, trace.t_end, constants)
    if check_perturbative:
        peak = coherence_peak(trace, target, constants)
        if peak > 0.1:
            warnings.warn(
                f"coherence magnitude reaches {peak:.3f}; the weak-drive "
                "approximation degrades above ~0.1",
                stacklevel=2,
            )
    if target.xi == 0.0:
        return FieldTrace(trace.t_start, trace.dt, trace.samples.copy())

    gamma = constants.gamma
    t_mid = trace.times[:-1] + 0.5 * trace.dt
    decay = 0.5 * gamma
    e_upper = np.exp(-(decay + 1j * gamma * target.detuning_upper(t_mid)) * trace.dt)
    if target.is_single_line:
        e_lower = None
    else:
        e_lower = np.exp(-(decay + 1j * gamma * target.detuning_lower(t_mid)) * trace.dt)

    src_coef = 6.0 * gamma * target.xi * constants.cg
    drive = 0.25 * constants.cg
    out = kernels.propagate_slabs(
        trace.samples, e_upper, e_lower, src_coef, drive, trace.dt, grid.nz
    )
    return FieldTrace(trace.t_start, trace.dt, out)


def simulate_chain(
    comb: CombSystem,
    pulse: PulseSpec,
    grid: Grid,
    constants: PhysConstants = FE57,
) -> list[FieldTrace]:
    """Boundary traces of the chain; element 0 is the sampled input.

    The output of each target feeds the next one, so element n is the field
    behind the first n targets and the last element is the chain output.
    """
    if grid.dt > pulse.tau_p / _MIN_PULSE_SAMPLES:
        raise GridResolutionError(
            f"dt = {grid.dt:.4g} ns resolves less than {_MIN_PULSE_SAMPLES} samples "
            f"per pulse width {pulse.tau_p} ns"
        )
    traces = [sample_pulse(pulse, grid.t0, grid.dt, grid.n)]
    for target in comb.targets:
        traces.append(propagate_target(traces[-1], target, grid, constants))
    return traces


@dataclass(frozen=True)
class ConvergenceLevel:
    dt: float
    nz: int
    efficiency: float
    delta: float  # change against the previous level (nan at level 0)


@dataclass(frozen=True)
class ConvergenceReport:
    levels: tuple[ConvergenceLevel, ...]
    converged_grid: Grid
    converged: bool

    @property
    def efficiency(self) -> float:
        return self.levels[-1].efficiency

    def ratios(self) -> list[float]:
        """Successive reduction factors of the level-to-level change."""
        deltas = [lv.delta for lv in self.levels[1:]]
        return [
            abs(a) / abs(b) for a, b in zip(deltas[:-1], deltas[1:]) if abs(b) > 0
        ]


def _windowed_efficiency(comb, pulse, grid, constants, window):
    traces = simulate_chain(comb, pulse, grid, constants)
    inp, out = traces[0], traces[-1]
    if window is None:
        return out.energy() / inp.energy()
    i0, i1 = _window_indices(out, window)
    return out.energy(i0, i1) / inp.energy()


def convergence_study(
    comb: CombSystem,
    pulse: PulseSpec,
    base_grid: Grid,
    constants: PhysConstants = FE57,
    tol: float = 1e-3,
    max_levels: int = 6,
) -> ConvergenceReport:
    """Refine the grid until the windowed efficiency stabilizes.

    Each level halves the time step and doubles the slab count.  The echo
    window is detected once on the base level and held fixed so the level
    differences measure pure discretization error; when the chain emits no
    echo the full transmitted energy ratio is tracked instead.  Convergence
    means the change falls below tol; the grid of the first stable level is
    returned.  Failure to stabilize within max_levels refinements raises
    ConvergenceError with the efficiency sequence.
    """
    base_traces = simulate_chain(comb, pulse, base_grid, constants)
    out = base_traces[-1]
    hint = expected_echo_time(pulse.tau_i, comb.spacing, constants)
    try:
        window = detect_window(out, pulse.tau_i, pulse.tau_p, hint_echo_time=hint)
    except EchoDetectionError:
        window = None

    grids = [base_grid]
    i0, i1 = (0, out.n - 1) if window is None else _window_indices(out, window)
    levels = [
        ConvergenceLevel(
            base_grid.dt,
            base_grid.nz,
            out.energy(i0, i1) / base_traces[0].energy(),
            float("nan"),
        )
    ]
    for level in range(1, max_levels + 1):
        grid = grids[-1].refined()
        grids.append(grid)
        e = _windowed_efficiency(comb, pulse, grid, constants, window)
        levels.append(ConvergenceLevel(grid.dt, grid.nz, e, e - levels[-1].efficiency))
        if abs(levels[-1].delta) < tol:
            return ConvergenceReport(tuple(levels), grids[level - 1], True)
    seq = ", ".join(f"{lv.efficiency:.6f}" for lv in levels)
    raise ConvergenceError(
        f"efficiency did not stabilize within {max_levels} refinements: {seq}"
    )
