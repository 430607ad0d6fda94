"""Physical constants of the driven nuclear transition.

Internally the package works in ns and in units of the excited-state decay
rate: detunings, comb spacings and resonant thicknesses are dimensionless.
SI values only enter when converting a comb spacing to a target velocity.
"""

import math
from dataclasses import dataclass

HBAR = 1.054571817e-34  # J s
EV = 1.602176634e-19    # J


@dataclass(frozen=True)
class PhysConstants:
    """Transition parameters, defaulting to the 14.4 keV line of 57Fe.

    gamma             spontaneous decay rate of the excited states, 1/ns
    cg                Clebsch-Gordan coefficient of the two driven
                      delta-m = 0 transitions
    c_light           speed of light, m/s
    omega_transition  unperturbed transition angular frequency, rad/s
    """

    gamma: float = 1.0 / 141.1
    cg: float = math.sqrt(2.0 / 3.0)
    c_light: float = 299792458.0
    omega_transition: float = 14.4e3 * EV / HBAR

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("decay rate must be positive")
        if self.omega_transition <= 0:
            raise ValueError("transition frequency must be positive")

    @property
    def lifetime(self) -> float:
        """Excited-state lifetime in ns."""
        return 1.0 / self.gamma


FE57 = PhysConstants()
