"""Targets, combs, pulses and the builders for standard comb layouts.

A comb system is an ordered chain of resonant absorber targets.  Each target
contributes one absorption line (two when magnetized) whose position in units
of the decay rate is set by a static Doppler shift, a hyperfine splitting, a
time-dependent Doppler shift from mechanical acceleration, or a combination.
Times are in ns throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import FE57, PhysConstants


@dataclass(frozen=True)
class MotionProfile:
    """Smooth acceleration of a target towards a terminal Doppler shift.

    The induced detuning, in units of the decay rate, is

        0.5 * epsilon * s_units * (1 + tanh((t - tau_d) / (0.25 * b_d)))

    epsilon   -1 (red shift), 0 (stationary) or +1 (blue shift)
    tau_d     mid-time of the acceleration, ns
    b_d       rise time of the target velocity, ns
    s_units   comb-spacing multiple reached at late times
    """

    epsilon: int = 0
    tau_d: float = 0.0
    b_d: float = 1.0
    s_units: float = 0.0

    def __post_init__(self):
        if self.epsilon not in (-1, 0, 1):
            raise ValueError(f"epsilon must be -1, 0 or +1, got {self.epsilon}")
        if self.epsilon != 0 and self.b_d <= 0:
            raise ValueError("b_d must be positive for an accelerated target")


STATIC = MotionProfile()


def doppler_shift_at(t, motion: MotionProfile):
    """Time-dependent Doppler detuning in units of the decay rate.

    Accepts a scalar or an array of times; the return matches the input
    shape.  Identically zero for a stationary profile.
    """
    if motion.epsilon == 0:
        if isinstance(t, np.ndarray):
            return np.zeros_like(t, dtype=float)
        return 0.0
    ramp = np.tanh((np.asarray(t, dtype=float) - motion.tau_d) / (0.25 * motion.b_d))
    shift = 0.5 * motion.epsilon * motion.s_units * (1.0 + ramp)
    if isinstance(t, np.ndarray):
        return shift
    return float(shift)


@dataclass(frozen=True)
class TargetSpec:
    """One physical absorber in the chain.

    xi              resonant thickness, dimensionless, >= 0
    hyperfine       ground+excited hyperfine splitting in decay-rate units
                    (0 for an unmagnetized target)
    doppler_static  constant Doppler detuning in decay-rate units
    motion          acceleration profile (STATIC for a fixed target)

    The two driven transitions sit at +hyperfine and -hyperfine relative to
    the common Doppler detuning; they are degenerate when hyperfine is 0.
    """

    xi: float
    hyperfine: float = 0.0
    doppler_static: float = 0.0
    motion: MotionProfile = STATIC

    def __post_init__(self):
        if self.xi < 0:
            raise ValueError(f"resonant thickness must be >= 0, got {self.xi}")

    @property
    def is_static(self) -> bool:
        return self.motion.epsilon == 0

    @property
    def is_single_line(self) -> bool:
        return self.hyperfine == 0.0

    def detuning_upper(self, t):
        """Detuning of the upper hyperfine transition, decay-rate units."""
        return self.hyperfine + self.doppler_static + doppler_shift_at(t, self.motion)

    def detuning_lower(self, t):
        """Detuning of the lower hyperfine transition, decay-rate units."""
        return -self.hyperfine + self.doppler_static + doppler_shift_at(t, self.motion)

    def max_abs_detuning(self, t0: float, t1: float) -> float:
        """Largest |detuning| of either transition over [t0, t1].

        The acceleration ramp is monotone in t, so the extrema sit at the
        window edges.
        """
        worst = 0.0
        for t in (t0, t1):
            shift = doppler_shift_at(t, self.motion)
            for line in (self.hyperfine, -self.hyperfine):
                worst = max(worst, abs(line + self.doppler_static + shift))
        return worst


@dataclass(frozen=True)
class CombSystem:
    """Ordered sequence of targets plus the global comb parameters.

    spacing is the tooth separation in decay-rate units; shape_k records the
    width parameter used when the comb was built by the shaped builder
    (0 for a flat comb).
    """

    targets: tuple[TargetSpec, ...]
    spacing: float
    shape_k: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.spacing <= 0:
            raise ValueError(f"comb spacing must be positive, got {self.spacing}")
        if self.shape_k < 0:
            raise ValueError(f"shape parameter must be >= 0, got {self.shape_k}")

    @property
    def m(self) -> int:
        return len(self.targets)

    @property
    def total_xi(self) -> float:
        return float(sum(t.xi for t in self.targets))

    @property
    def is_static(self) -> bool:
        return all(t.is_static for t in self.targets)

    @property
    def is_single_line(self) -> bool:
        return all(t.is_single_line for t in self.targets)

    def max_abs_detuning(self, t0: float, t1: float) -> float:
        if not self.targets:
            return 0.0
        return max(t.max_abs_detuning(t0, t1) for t in self.targets)


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian input envelope omega0 * exp(-(t - tau_i)^2 / tau_p^2).

    tau_i is the arrival time of the peak and tau_p the 1/e half width of
    the amplitude, both in ns.  omega0 is an arbitrary linear amplitude.
    """

    tau_p: float
    tau_i: float
    omega0: float = 1.0

    def __post_init__(self):
        if self.tau_p <= 0:
            raise ValueError(f"pulse width must be positive, got {self.tau_p}")

    def envelope(self, t):
        """Complex envelope sampled at t (scalar or array)."""
        t = np.asarray(t, dtype=float)
        return (self.omega0 * np.exp(-(((t - self.tau_i) / self.tau_p) ** 2))).astype(
            complex
        )

    @property
    def energy(self) -> float:
        """Exact integral of |envelope|^2 over all times."""
        return self.omega0**2 * self.tau_p * math.sqrt(math.pi / 2.0)


def default_arrival_time(tau_p: float) -> float:
    """Arrival time leaving a negligible envelope tail at t = 0."""
    return 5.0 * tau_p


def shaped_weights(
    m: int, k: float, tau_p: float, s: float, constants: PhysConstants = FE57
) -> np.ndarray:
    """Normalized Gaussian thickness distribution over m comb teeth.

    Tooth n of m (1-based, m odd) receives weight proportional to
    exp(-(0.5 * k * tau_p * (n - (m+1)/2) * s * gamma)^2), matching the comb
    envelope to the spectrum of a Gaussian pulse of width tau_p.  k = 0
    yields uniform weights; larger k narrows the comb envelope.
    """
    if m < 1 or m % 2 == 0:
        raise ValueError(f"target number must be a positive odd integer, got {m}")
    if tau_p <= 0:
        raise ValueError(f"pulse width must be positive, got {tau_p}")
    if k < 0:
        raise ValueError(f"shape parameter must be >= 0, got {k}")
    if s <= 0:
        raise ValueError(f"comb spacing must be positive, got {s}")
    n = np.arange(1, m + 1, dtype=float)
    arg = 0.5 * k * tau_p * (n - 0.5 * (m + 1)) * s * constants.gamma
    w = np.exp(-(arg**2))
    return w / w.sum()


def terminal_velocity(s: float, constants: PhysConstants = FE57) -> float:
    """Target velocity (m/s) whose Doppler shift equals s decay rates."""
    if s < 0:
        raise ValueError(f"comb spacing must be >= 0, got {s}")
    gamma_si = constants.gamma * 1e9  # 1/ns -> rad/s
    return constants.c_light * s * gamma_si / constants.omega_transition


def tooth_positions(m: int, s: float) -> np.ndarray:
    """Centered tooth detunings (n - (m+1)/2) * s for n = 1..m."""
    n = np.arange(1, m + 1, dtype=float)
    return (n - 0.5 * (m + 1)) * s


def build_flat_comb(m: int, s: float, xi_bar: float) -> CombSystem:
    """Comb of m identical static unmagnetized targets, equally spaced."""
    if m < 1:
        raise ValueError(f"target number must be >= 1, got {m}")
    if xi_bar < 0:
        raise ValueError(f"resonant thickness must be >= 0, got {xi_bar}")
    targets = tuple(
        TargetSpec(xi=xi_bar, doppler_static=float(pos)) for pos in tooth_positions(m, s)
    )
    return CombSystem(targets=targets, spacing=s)


def build_shaped_comb(
    m: int,
    s: float,
    k: float,
    tau_p: float,
    total_xi: float,
    constants: PhysConstants = FE57,
) -> CombSystem:
    """Comb whose per-target thicknesses follow the shaped distribution.

    The total resonant thickness is distributed over the teeth with
    shaped_weights; k = 0 reduces to build_flat_comb(m, s, total_xi / m).
    """
    if total_xi < 0:
        raise ValueError(f"total resonant thickness must be >= 0, got {total_xi}")
    weights = shaped_weights(m, k, tau_p, s, constants)
    targets = tuple(
        TargetSpec(xi=float(total_xi * w), doppler_static=float(pos))
        for w, pos in zip(weights, tooth_positions(m, s))
    )
    return CombSystem(targets=targets, spacing=s, shape_k=k)


# Split-line chains for the dynamically shifted comb.  Each entry is
# (line offset in spacing units, acceleration sign); hybrid entries put the
# offset into the hyperfine splitting, Doppler entries into the initial
# velocity.  In the six-target Doppler chain the labels run b1..b6 in list
# order; b1 and b4 are the pair whose teeth drift outward and never cross
# the rest of the comb, so the pruned four-target variant drops exactly
# those two.
_HYBRID_VARIANTS = {
    "M4": ((1, +1), (1, -1), (0, +1), (0, -1)),
    "M6": ((2, +1), (2, -1), (1, +1), (1, -1), (0, +1), (0, -1)),
}

_DOPPLER_M6 = ((1, +1), (1, -1), (0, -1), (-1, -1), (0, +1), (-1, +1))

_DOPPLER_VARIANTS = {
    "M10": (
        (2, -1),
        (2, +1),
        (-2, -1),
        (-2, +1),
        (1, -1),
        (1, +1),
        (-1, -1),
        (-1, +1),
        (0, -1),
        (0, +1),
    ),
    "M6": _DOPPLER_M6,
    # drop the outward-drifting pair (b1 and b4)
    "M4": tuple(_DOPPLER_M6[i] for i in (1, 2, 4, 5)),
}


def build_dynamical_hybrid(
    variant: str, s: float, xi_bar: float, tau_d: float, b_d: float
) -> CombSystem:
    """Accelerated chain with hyperfine-split (magnetized) targets.

    M4: two magnetized targets (splitting = spacing) and two unmagnetized
    ones, one of each accelerated up and one down.  M6 adds a magnetized
    pair at twice the spacing.  All targets share xi_bar and the
    acceleration timing (tau_d, b_d).
    """
    key = variant.upper()
    if key not in _HYBRID_VARIANTS:
        raise ValueError(f"unknown hybrid variant {variant!r}; expected M4 or M6")
    if xi_bar < 0:
        raise ValueError(f"resonant thickness must be >= 0, got {xi_bar}")
    targets = tuple(
        TargetSpec(
            xi=xi_bar,
            hyperfine=mult * s,
            motion=MotionProfile(epsilon=eps, tau_d=tau_d, b_d=b_d, s_units=s),
        )
        for mult, eps in _HYBRID_VARIANTS[key]
    )
    return CombSystem(targets=targets, spacing=s)


def build_dynamical_doppler(
    variant: str, s: float, xi_bar: float, tau_d: float, b_d: float
) -> CombSystem:
    """Accelerated chain of unmagnetized targets with initial velocities.

    M10 is the full equivalent of the six-target hybrid chain (each split
    line realized by its own target); M6 uses initial shifts of +-spacing
    and zero, each in an up/down accelerated pair; M4 is M6 without the
    outward-drifting pair.
    """
    key = variant.upper()
    if key not in _DOPPLER_VARIANTS:
        raise ValueError(f"unknown Doppler variant {variant!r}; expected M4, M6 or M10")
    if xi_bar < 0:
        raise ValueError(f"resonant thickness must be >= 0, got {xi_bar}")
    targets = tuple(
        TargetSpec(
            xi=xi_bar,
            doppler_static=mult * s,
            motion=MotionProfile(epsilon=eps, tau_d=tau_d, b_d=b_d, s_units=s),
        )
        for mult, eps in _DOPPLER_VARIANTS[key]
    )
    return CombSystem(targets=targets, spacing=s)
