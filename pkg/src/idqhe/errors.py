"""Exception hierarchy. ``exit_code`` is what the CLI returns for each class."""


class EngineError(Exception):
    exit_code = 1


class SolverError(EngineError):
    """An iterative solver failed to converge."""

    exit_code = 3

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class GridError(SolverError):
    """Quadrature grid cannot represent the dressed energy (cutoff too small)."""


class InversionError(SolverError):
    """Chemical potential could not be bracketed for a target density."""


class MatchingError(SolverError):
    """Isentropic temperature could not be bracketed."""


class UnsupportedLimitError(EngineError, ValueError):
    exit_code = 2


class DomainError(EngineError, ValueError):
    """Argument lies outside the validity domain of a closed form."""

    exit_code = 2


class ResourceError(EngineError):
    exit_code = 3

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class NotAnEngineError(EngineError):
    """Cycle parameters give no net heat intake (Q2 <= 0)."""

    exit_code = 4
