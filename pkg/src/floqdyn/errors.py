"""Exception hierarchy shared across the package."""


class FloqdynError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(FloqdynError, ValueError):
    """An operator or state failed a structural precondition."""


class ConfigError(FloqdynError, ValueError):
    """A run/sweep configuration is malformed or inconsistent (CLI exit 2)."""


class NumericalError(FloqdynError, RuntimeError):
    """A numerical procedure failed to converge or lost accuracy (CLI exit 3)."""


class StepSizeError(NumericalError):
    """Integration step size too coarse for the requested accuracy."""


class ResolutionError(NumericalError):
    """Sampling grid too coarse for the requested harmonic content."""
