"""Exception types shared across the package."""


class QncError(Exception):
    """Base class for package errors."""


class ConfigError(QncError, ValueError):
    """Invalid configuration or arguments."""


class NumericalError(QncError, RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class QuadratureError(NumericalError):
    """Tail-probability quadrature failed to converge."""


class DecodeError(NumericalError):
    """The l1-min decoder failed to converge within its iteration cap."""


class InfeasibleProblemError(QncError, ValueError):
    """No point satisfies the decoder's residual constraint."""
