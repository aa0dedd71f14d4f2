"""Exception hierarchy shared across the variable, map, and solver layers."""


class FlatvarsError(Exception):
    """Base class for all library-specific errors."""


class InvalidNameError(FlatvarsError, ValueError):
    """A variable name is empty or not a string."""


class InvalidCompositionError(FlatvarsError, ValueError):
    """A structural declaration is malformed (empty concat, zero count, unnamed root, ...)."""


class DuplicateNameError(FlatvarsError, ValueError):
    """Two siblings under the same branch share a name."""


class InvalidQueryError(FlatvarsError, ValueError):
    """A query token stream is malformed (empty, starts with an index, bad token type)."""


class UnknownPathError(FlatvarsError, LookupError):
    """No root-to-descendant chain matches the query names."""


class AmbiguousPathError(FlatvarsError, LookupError):
    """More than one chain matches the query names; carries the conflicting chains."""

    def __init__(self, message: str, chains=()):
        super().__init__(message)
        self.chains = tuple(chains)


class IndexOutOfRangeError(FlatvarsError, IndexError):
    """A copy index is outside [0, count) for its replicated node."""


class QueryArityError(FlatvarsError, ValueError):
    """A query supplies too few or too many copy indices for the matched chain."""


class SizeMismatchError(FlatvarsError, ValueError):
    """A buffer or value does not have the expected number of scalars."""


class EvaluationError(FlatvarsError, ArithmeticError):
    """A differentiated function produced non-finite output."""


class DomainError(FlatvarsError, ValueError):
    """A physical input is outside its admissible domain."""


class ValidationError(FlatvarsError, ValueError):
    """A problem instance or benchmark configuration fails its consistency checks."""


class SolverError(FlatvarsError, RuntimeError):
    """The solver failed irrecoverably; ``iterate`` holds the offending buffer."""

    def __init__(self, message: str, iterate=None):
        super().__init__(message)
        self.iterate = iterate
