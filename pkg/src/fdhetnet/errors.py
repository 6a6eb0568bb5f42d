"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An input parameter lies outside its admissible range."""


class DivergenceError(ParameterError):
    """The path-loss exponent makes an interference integral diverge."""


class InsufficientPointsError(ValueError):
    """A point set holds fewer points than an order statistic requires."""


class NoCandidateError(ValueError):
    """Association was requested over an empty set of base stations."""


class NumericalError(RuntimeError):
    """A quadrature failed to converge.

    The message names the integral and carries the diagnostics that were
    available when the check failed.
    """


class CoefficientUndefinedError(ValueError):
    """Lyapunov weights need half-duplex rates above full-duplex rates."""


class SchemaError(ValueError):
    """A configuration file is missing a key or holds a bad value."""
