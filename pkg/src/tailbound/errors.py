"""Exception hierarchy shared by every tailbound module."""


class TailBoundError(Exception):
    """Base class for all errors raised by tailbound."""


class InvalidParameterError(TailBoundError, ValueError):
    def __init__(self, parameter, message):
        self.parameter = parameter
        super().__init__(f"invalid parameter {parameter!r}: {message}")


class DomainError(TailBoundError, ValueError):
    """Evaluation point is not strictly inside the support."""


class PreconditionError(TailBoundError, ValueError):
    def __init__(self, precondition, message):
        self.precondition = precondition
        super().__init__(f"precondition {precondition!r} violated: {message}")


class SingularDenominatorError(TailBoundError, ArithmeticError):
    """A bound or condition denominator vanished."""


class RegionError(TailBoundError, ValueError):
    """A closed-form bound was evaluated outside its validity region."""

    def __init__(self, message, threshold=None):
        self.threshold = threshold
        super().__init__(message)


class OracleError(TailBoundError, RuntimeError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate, error_bound):
        self.estimate = estimate
        self.error_bound = error_bound
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")


class PairingError(TailBoundError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
