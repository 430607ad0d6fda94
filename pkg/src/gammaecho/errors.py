"""Exception types shared across the package.

Every error raised on a user-facing path derives from GammaEchoError so the
command line can map failure classes to distinct exit codes.
"""


class GammaEchoError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(GammaEchoError, ValueError):
    """Malformed or inconsistent run configuration."""


class AnalyticDomainError(GammaEchoError, ValueError):
    """Comb outside the domain of the frequency-series solution."""


class GridResolutionError(GammaEchoError, ValueError):
    """Time grid too coarse for the detunings or pulse present."""


class EchoDetectionError(GammaEchoError, RuntimeError):
    """No echo signal found after the transmitted pulse."""


class ConvergenceError(GammaEchoError, RuntimeError):
    """Grid refinement failed to stabilize the efficiency."""
