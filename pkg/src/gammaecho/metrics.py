"""Echo detection, efficiency, fidelity and timing on field traces.

The echo window [t1, t2] is the interval that contains only the echo
signal: efficiency is the windowed output energy over the total input
energy, fidelity the normalized overlap of the windowed output with the
time-shifted input envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import FE57, PhysConstants
from .errors import EchoDetectionError
from .model import CombSystem, PulseSpec
from .trace import FieldTrace

# Local maxima below this fraction of the trace's peak intensity are treated
# as numerical noise, keeping detection invariant under amplitude scaling.
_NOISE_FRACTION = 1e-9


def expected_echo_time(tau_i: float, s: float, constants: PhysConstants = FE57) -> float:
    """Echo peak time tau_i + 2*pi/(spacing * gamma) of a static comb."""
    if s <= 0:
        raise ValueError(f"comb spacing must be positive, got {s}")
    return tau_i + 2.0 * math.pi / (s * constants.gamma)


@dataclass(frozen=True)
class EchoWindow:
    """Time interval [t1, t2] bracketing the echo, ns."""

    t1: float
    t2: float

    def __post_init__(self):
        if not self.t1 < self.t2:
            raise ValueError(f"window start {self.t1} must precede end {self.t2}")


@dataclass(frozen=True)
class EchoReport:
    """Summary of one storage/retrieval run."""

    efficiency: float
    fidelity: float
    window: EchoWindow
    echo_peak: float
    input_energy: float
    echo_energy: float
    shift_used: float

    def as_record(self) -> dict:
        """Flat key/value form for CSV and manifest output."""
        return {
            "efficiency": self.efficiency,
            "fidelity": self.fidelity,
            "window_t1_ns": self.window.t1,
            "window_t2_ns": self.window.t2,
            "echo_peak_ns": self.echo_peak,
            "input_energy": self.input_energy,
            "echo_energy": self.echo_energy,
            "shift_ns": self.shift_used,
        }


def _local_maxima(intensity: np.ndarray) -> np.ndarray:
    """Indices of strict interior local maxima."""
    left = intensity[1:-1] > intensity[:-2]
    right = intensity[1:-1] >= intensity[2:]
    return np.nonzero(left & right)[0] + 1


def detect_window(
    trace: FieldTrace,
    tau_i: float,
    tau_p: float,
    hint_echo_time: float | None = None,
) -> EchoWindow:
    """Locate the echo window on an output trace.

    The echo peak is the largest local maximum of |amplitude|^2 after the
    transmitted pulse (t > tau_i + 4*tau_p); when hint_echo_time is given the
    local maximum closest to the hint is used instead, which keeps detection
    robust when pulse and echo partially overlap.  t1 is the intensity
    minimum between the transmitted pulse and the peak, t2 the minimum after
    the peak, capped at half an echo delay so a later revival stays outside.
    """
    intensity = trace.intensity
    floor = _NOISE_FRACTION * float(intensity.max(initial=0.0))
    if floor == 0.0:
        raise EchoDetectionError("trace is identically zero")
    maxima = _local_maxima(intensity)
    maxima = maxima[intensity[maxima] > floor]

    guard_time = tau_i + 2.0 * tau_p
    if hint_echo_time is not None:
        candidates = maxima[trace.times[maxima] > guard_time]
        if candidates.size == 0:
            raise EchoDetectionError(
                f"no echo found after the transmitted pulse (t > {guard_time:.3g} ns)"
            )
        peak = int(candidates[np.argmin(np.abs(trace.times[candidates] - hint_echo_time))])
    else:
        start_time = tau_i + 4.0 * tau_p
        candidates = maxima[trace.times[maxima] > start_time]
        if candidates.size == 0:
            raise EchoDetectionError(
                f"no echo found after the transmitted pulse (t > {start_time:.3g} ns)"
            )
        peak = int(candidates[np.argmax(intensity[candidates])])

    peak_time = trace.t_start + peak * trace.dt

    # transmitted pulse peak: strongest sample up to the guard time
    guard_idx = min(trace.index_at(guard_time), peak - 1)
    trans = int(np.argmax(intensity[: guard_idx + 1])) if guard_idx >= 0 else 0
    if peak <= trans + 1:
        raise EchoDetectionError("echo peak is not separated from the transmitted pulse")
    t1_idx = trans + 1 + int(np.argmin(intensity[trans + 1 : peak]))

    # window end: deepest minimum before a possible second echo
    cap = peak + max(2, int(round(0.5 * (peak_time - tau_i) / trace.dt)))
    cap = min(cap, trace.n - 1)
    if cap <= peak + 1:
        t2_idx = cap
    else:
        t2_idx = peak + 1 + int(np.argmin(intensity[peak + 1 : cap + 1]))

    t1 = trace.t_start + t1_idx * trace.dt
    t2 = trace.t_start + t2_idx * trace.dt
    return EchoWindow(t1, t2)


def peak_time(trace: FieldTrace, window: EchoWindow) -> float:
    """Time of the intensity maximum inside the window."""
    i0, i1 = _window_indices(trace, window)
    i = i0 + int(np.argmax(trace.intensity[i0 : i1 + 1]))
    return trace.t_start + i * trace.dt


def _window_indices(trace: FieldTrace, window: EchoWindow) -> tuple[int, int]:
    eps = 1e-9 * trace.dt
    i0 = int(math.ceil((window.t1 - trace.t_start) / trace.dt - eps))
    i1 = int(math.floor((window.t2 - trace.t_start) / trace.dt + eps))
    i0 = min(max(i0, 0), trace.n - 1)
    i1 = min(max(i1, 0), trace.n - 1)
    return i0, i1


def efficiency(input_trace: FieldTrace, output_trace: FieldTrace, window: EchoWindow) -> float:
    """Windowed output energy divided by the total input energy."""
    e_in = input_trace.energy()
    if e_in <= 0:
        raise ValueError("input trace carries no energy")
    i0, i1 = _window_indices(output_trace, window)
    return output_trace.energy(i0, i1) / e_in


def _resample(trace: FieldTrace, t: np.ndarray) -> np.ndarray:
    """Linear interpolation of the complex envelope, zero outside the span."""
    return np.interp(t, trace.times, trace.samples, left=0.0, right=0.0)


def fidelity(
    input_trace: FieldTrace,
    output_trace: FieldTrace,
    window: EchoWindow,
    shift: float,
) -> float:
    """Normalized overlap |<input(t - shift), output(t)>_window|^2.

    The numerator integrates over the echo window only; the normalization is
    the total input energy times the windowed output energy, so an exact
    scaled and shifted copy scores 1.
    """
    if not math.isfinite(shift):
        raise ValueError(f"shift must be finite, got {shift}")
    i0, i1 = _window_indices(output_trace, window)
    if i1 <= i0:
        raise ValueError("echo window contains no samples")
    t = output_trace.times[i0 : i1 + 1]
    ref = _resample(input_trace, t - shift)
    out = output_trace.samples[i0 : i1 + 1]
    integrand = np.conj(ref) * out
    overlap = output_trace.dt * (integrand.sum() - 0.5 * (integrand[0] + integrand[-1]))
    denom = input_trace.energy() * output_trace.energy(i0, i1)
    if denom <= 0:
        raise ValueError("fidelity undefined for zero input or zero windowed output")
    return float(abs(overlap) ** 2 / denom)


def _optimized_shift(
    input_trace: FieldTrace,
    output_trace: FieldTrace,
    window: EchoWindow,
    center: float,
    tau_p: float,
) -> float:
    """Shift within +-2*tau_p of center that maximizes the fidelity."""
    step = 0.5 * output_trace.dt
    offsets = np.arange(-2.0 * tau_p, 2.0 * tau_p + 0.5 * step, step)
    best_shift, best_f = center, -1.0
    for off in offsets:
        f = fidelity(input_trace, output_trace, window, center + off)
        if f > best_f:
            best_f, best_shift = f, center + off
    return best_shift


def report(
    input_trace: FieldTrace,
    output_trace: FieldTrace,
    pulse: PulseSpec,
    comb: CombSystem,
    constants: PhysConstants = FE57,
    shift_mode: str = "auto",
    window: EchoWindow | None = None,
) -> EchoReport:
    """Detect the echo and assemble efficiency, fidelity and timing.

    shift_mode selects the input/echo alignment used by the fidelity:
    "expected" uses the static-comb echo delay, "peak" the detected peak
    offset, "optimize" scans +-2*tau_p around the peak offset for the best
    overlap, and "auto" picks "expected" for static combs and "peak"
    otherwise.

    Detection is always hinted with the comb-revival time: any comb of
    spacing s re-emits near tau_i + 2*pi/(s*gamma), and for pulses wider
    than a quarter of that delay an unhinted search would discard the echo.
    """
    static = comb.is_static
    hint = expected_echo_time(pulse.tau_i, comb.spacing, constants)
    if window is None:
        window = detect_window(output_trace, pulse.tau_i, pulse.tau_p, hint_echo_time=hint)
    peak = peak_time(output_trace, window)

    mode = shift_mode
    if mode == "auto":
        mode = "expected" if static else "peak"
    if mode == "expected":
        shift = expected_echo_time(pulse.tau_i, comb.spacing, constants) - pulse.tau_i
    elif mode == "peak":
        shift = peak - pulse.tau_i
    elif mode == "optimize":
        shift = _optimized_shift(
            input_trace, output_trace, window, peak - pulse.tau_i, pulse.tau_p
        )
    else:
        raise ValueError(f"unknown shift mode {shift_mode!r}")

    e = efficiency(input_trace, output_trace, window)
    f = fidelity(input_trace, output_trace, window, shift)
    i0, i1 = _window_indices(output_trace, window)
    return EchoReport(
        efficiency=e,
        fidelity=f,
        window=window,
        echo_peak=peak,
        input_energy=input_trace.energy(),
        echo_energy=output_trace.energy(i0, i1),
        shift_used=shift,
    )
