"""Exception hierarchy shared by all modules."""


class CELabError(Exception):
    """Base class for every error raised by celab."""


class DomainError(CELabError, ValueError):
    """An operation was called outside its mathematical domain."""


class DegreeError(DomainError):
    """Polynomial or map degree is too small for the requested operation."""


class WholeSphereError(DomainError):
    """A chordal disk of radius >= 2 covers the whole sphere."""


class RootFindingError(CELabError, ArithmeticError):
    """Simultaneous iteration did not converge.

    ``partial`` holds the last iterates so callers can inspect them.
    """

    def __init__(self, message, partial=None, iterations=None):
        super().__init__(message)
        self.partial = partial
        self.iterations = iterations


class SRViolation(CELabError, ArithmeticError):
    """A critical orbit hit the critical set exactly."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResourceError(CELabError, MemoryError):
    """A computation would exceed a configured size cap."""

    def __init__(self, message, max_feasible=None):
        super().__init__(message)
        self.max_feasible = max_feasible


class LiftingError(CELabError, ArithmeticError):
    """Continuation of an inverse branch failed."""

    def __init__(self, message, level=None, diagnostics=None):
        super().__init__(message)
        self.level = level
        self.diagnostics = diagnostics or {}


class DegenerateBoundaryError(LiftingError):
    """Step size underflowed: a critical value sits (almost) on the lifted curve."""


class BoundaryAmbiguityError(DomainError):
    """Point lies on a curve, so inside/outside is undefined."""


class ConfigError(CELabError, ValueError):
    """Invalid run configuration; ``path`` locates the offending key."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
