"""Exception hierarchy shared by every module of the package."""


class LacunaryError(Exception):
    """Base class for all errors raised by this package."""


class LacunarityViolation(LacunaryError):
    """A consecutive ratio a[n+1]/a[n] falls below the declared ratio."""


class PrecisionExhausted(LacunaryError):
    """The requested computation needs more bits than the budget allows."""


class InsufficientDigits(PrecisionExhausted):
    """An approximately known input (digit string) is too coarse for the request."""


class NearIntegerAmbiguity(LacunaryError):
    """The integer part of alpha * a[n] cannot be decided at working precision."""


class SlowDecay(LacunaryError):
    """The test function has no usable spectral tail bound (box family)."""


class SupportTooWide(LacunaryError):
    """N <= 2L: more than one lattice shift per coordinate could contribute."""


class CostGuardExceeded(LacunaryError):
    """A brute-force enumeration exceeds its configured size guard."""


class BoundaryAmbiguous(LacunaryError):
    """Some enumeration decision could not be certified by interval arithmetic."""


class DegenerateFit(LacunaryError):
    """Fewer than three usable points remain for a log-log fit."""


class BudgetExceeded(LacunaryError):
    """The predicted cost of an experiment exceeds the configured budget."""


class ConfigError(LacunaryError):
    """Malformed configuration file (unknown key, bad value, missing section)."""
