"""Hierarchical optimization variables over flat scalar buffers.

Declare states, inputs, and parameters as named trees, freeze them into
constant-offset layouts, and read/write any subvariable through zero-search
views of one contiguous buffer.  A small multiple-shooting MPC stack
(forward-mode derivatives, Gauss-Newton SQP, quadrotor demo) exercises the
library end to end.
"""

from .errors import (
    AmbiguousPathError,
    DomainError,
    DuplicateNameError,
    EvaluationError,
    FlatvarsError,
    IndexOutOfRangeError,
    InvalidCompositionError,
    InvalidNameError,
    InvalidQueryError,
    QueryArityError,
    SizeMismatchError,
    SolverError,
    UnknownPathError,
    ValidationError,
)
from .variables import (
    BRANCH,
    QUATERNION,
    SCALAR,
    ChildSlot,
    Hierarchy,
    Kind,
    ResolvedVariable,
    VariableExpr,
    bind,
    build,
    children_of,
    concat,
    kind_of,
    leaf,
    pretty,
    replicate,
    resolve,
    size_of,
    vector,
)

__all__ = [
    "AmbiguousPathError",
    "BRANCH",
    "ChildSlot",
    "DomainError",
    "DuplicateNameError",
    "EvaluationError",
    "FlatvarsError",
    "Hierarchy",
    "IndexOutOfRangeError",
    "InvalidCompositionError",
    "InvalidNameError",
    "InvalidQueryError",
    "Kind",
    "QUATERNION",
    "QueryArityError",
    "ResolvedVariable",
    "SCALAR",
    "SizeMismatchError",
    "SolverError",
    "UnknownPathError",
    "ValidationError",
    "VariableExpr",
    "bind",
    "build",
    "children_of",
    "concat",
    "kind_of",
    "leaf",
    "pretty",
    "replicate",
    "resolve",
    "size_of",
    "vector",
]
