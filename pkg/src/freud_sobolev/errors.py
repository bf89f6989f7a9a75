"""Exception hierarchy shared by all modules."""


class FreudSobolevError(Exception):
    """Base class for every error raised by the package."""


class ArgumentError(FreudSobolevError, ValueError):
    """Argument outside the supported range."""


class ConvergenceError(FreudSobolevError, ArithmeticError):
    """Iterative solver did not converge; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NumericError(FreudSobolevError, ArithmeticError):
    """Arithmetic breakdown (non-positive norm, eigensolver failure, ...)."""


class ResolutionError(FreudSobolevError, ValueError):
    """Quadrature rule too small for the requested exactness."""


class EvaluationError(FreudSobolevError, ArithmeticError):
    """Integrand returned a non-finite value at a quadrature node."""


class DomainError(FreudSobolevError, ValueError):
    """Point lies on a branch cut or the real axis where it is excluded."""


class ScaleError(FreudSobolevError, OverflowError):
    """Result not representable even after power-of-two scaling."""


class FieldError(FreudSobolevError, ValueError):
    """External field not admissible (MRS bracket could not be found)."""


class RangeError(FreudSobolevError, ValueError):
    """Requested size exceeds what an oracle can resolve reliably."""
