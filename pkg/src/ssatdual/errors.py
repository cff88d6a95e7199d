"""Exception types shared by every module."""


class SSATError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(SSATError, ValueError):
    """Input violates a precondition or a structural invariant."""


class UnsupportedError(SSATError):
    """The request is well-formed but outside what the engine computes."""


class UnsupportedCoefficientError(UnsupportedError):
    """Coefficient group cannot be used (e.g. an infinitely generated unit group)."""


class PreconditionError(ValidationError):
    """An operation was called on input that fails its stated precondition."""


class RewriteLoopError(SSATError, RuntimeError):
    """The rewrite system did not terminate within its step budget."""


class UnevaluatedError(SSATError):
    """K-theory (or another invariant) could not be evaluated exactly."""

    def __init__(self, reason: str, constraints=()):
        super().__init__(reason)
        self.reason = reason
        self.constraints = tuple(constraints)
