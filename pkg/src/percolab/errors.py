"""Exception types shared across the package."""


class UnsupportedRegionError(ValueError):
    """Raised when an operation is asked for a region shape it cannot handle."""


class ResourceCapExceeded(RuntimeError):
    """A configured hard cap (site count, edge count, enumeration size) was exceeded."""


class BudgetExceeded(RuntimeError):
    """An exploration budget ran out before the requested quantity was resolved.

    Distinct from "not connected": the answer is unknown, not negative.
    """


class InsufficientSignal(RuntimeError):
    """Monte Carlo data too weak to run the requested analysis."""


class InconclusiveBracket(RuntimeError):
    """Bisection endpoints are statistically indistinguishable at the given trial count."""


class CollapseOverlapError(RuntimeError):
    """Rescaled curves share no common abscissa range."""


class ConfigError(ValueError):
    """Experiment configuration failed validation."""
