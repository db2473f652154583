"""Exception hierarchy shared by all modules."""


class StolarskyFVError(Exception):
    """Base class for every error raised by the package."""


class DomainError(StolarskyFVError, ValueError):
    """Argument outside the mathematical domain of a function."""


class InvalidMeshError(StolarskyFVError, ValueError):
    pass


class ConfigurationError(StolarskyFVError, ValueError):
    pass


class ProblemEvaluationError(StolarskyFVError, ValueError):
    """A problem coefficient produced a non-finite value."""


class NumericError(StolarskyFVError, ArithmeticError):
    pass


class NonConvergenceError(StolarskyFVError, RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class OracleFailure(StolarskyFVError, AssertionError):
    pass


class ExprError(StolarskyFVError, ValueError):
    pass


class ExprSyntaxError(ExprError):
    """Parse failure; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.reason = message


class ExprEvalError(ExprError):
    pass


class ExprDomainError(ExprEvalError, DomainError):
    pass
