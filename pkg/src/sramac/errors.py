"""Exception types shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class DomainError(SimError):
    """A physical parameter or bias point left its valid domain."""


class RangeError(SimError):
    """A value fell outside a documented range (codes, sample times, ...)."""


class ConvergenceError(SimError):
    """An iterative solve failed to converge."""


class DegenerateError(SimError):
    """The readout level table is degenerate (levels too close to resolve)."""


class ResampleExhausted(SimError):
    """Rejection sampling of perturbed device parameters gave up."""


class ConfigError(SimError):
    """Configuration file or option could not be loaded or validated."""
