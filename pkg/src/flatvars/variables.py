"""Hierarchical variable declarations resolved to flat-buffer offsets.

Variables are declared as expressions -- named leaves composed with
``concat``, ``replicate``, and ``bind`` -- and then frozen into an immutable
:class:`Hierarchy` by :func:`build`.  Building computes the size and the
offset of every node once, so that any later path query is pure integer
lookup work against a fixed layout: the concatenation of all child copy
ranges tiles ``[0, size)`` of each branch exactly.

Queries address subvariables by name, with two conveniences borrowed from
deep state/input hierarchies in optimal control:

* replicated nodes (created by :func:`replicate`) consume exactly one copy
  index each, outermost first;
* intermediate names may be skipped entirely ("bypass") as long as the
  named subsequence matches exactly one root-to-descendant chain.

Ambiguity is detected per query, never silently resolved.  A node created
with ``replicate(1, ...)`` still consumes a copy index, so query arity does
not depend on the replication count.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import (
    AmbiguousPathError,
    DuplicateNameError,
    IndexOutOfRangeError,
    InvalidCompositionError,
    InvalidNameError,
    InvalidQueryError,
    QueryArityError,
    UnknownPathError,
)

Token = Union[str, int]


# ---------------------------------------------------------------------------
# Kinds


@dataclass(frozen=True)
class Kind:
    """Mathematical kind of a variable: scalar, sized vector, unit quaternion, or branch.

    ``n`` is the scalar count for leaf kinds and 0 for branches (a branch's
    size is the sum of its child subtree sizes and lives on the node).
    """

    tag: str
    n: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.tag != "branch"

    @property
    def size(self) -> int:
        if self.tag == "branch":
            raise InvalidCompositionError("branch kinds have no intrinsic size")
        return self.n

    def __str__(self) -> str:
        return f"vector({self.n})" if self.tag == "vector" else self.tag


SCALAR = Kind("scalar", 1)
QUATERNION = Kind("quaternion", 4)
BRANCH = Kind("branch", 0)


def vector(n: int) -> Kind:
    """Kind of a fixed-size vector of ``n`` scalars."""
    if not isinstance(n, numbers.Integral) or isinstance(n, bool) or n < 1:
        raise InvalidCompositionError(f"vector length must be a positive integer, got {n!r}")
    return Kind("vector", int(n))


# ---------------------------------------------------------------------------
# Declaration expressions


class VariableExpr:
    """Base class for declaration expressions; ``build`` freezes them into hierarchies."""

    __slots__ = ()

    def __rmul__(self, count: int) -> "VariableExpr":
        return replicate(count, self)


@dataclass(frozen=True)
class Leaf(VariableExpr):
    name: str
    kind: Kind


@dataclass(frozen=True)
class Concat(VariableExpr):
    parts: tuple


@dataclass(frozen=True)
class Replicate(VariableExpr):
    count: int
    expr: VariableExpr


@dataclass(frozen=True)
class Bound(VariableExpr):
    name: str
    expr: VariableExpr


def _check_name(name) -> str:
    if not isinstance(name, str) or not name:
        raise InvalidNameError(f"variable names must be nonempty strings, got {name!r}")
    return name


def leaf(name: str, kind: Kind) -> Leaf:
    """Declare a leaf variable of the given non-branch kind."""
    _check_name(name)
    if not isinstance(kind, Kind) or not kind.is_leaf:
        raise InvalidCompositionError(f"leaf variables need a scalar/vector/quaternion kind, got {kind!r}")
    return Leaf(name, kind)


def concat(parts: Sequence[VariableExpr]) -> Concat:
    """Concatenate declarations in order; sizes add up."""
    parts = tuple(parts)
    if not parts:
        raise InvalidCompositionError("concat needs at least one part")
    for p in parts:
        if not isinstance(p, VariableExpr):
            raise InvalidCompositionError(f"concat parts must be variable expressions, got {p!r}")
    return Concat(parts)

def replicate(count: int, expr: VariableExpr) -> Replicate:
    """Declare ``count`` consecutive copies of a named expression.

    Copies are addressed with a zero-based index in queries; this holds for
    ``count == 1`` as well.  Nested replication collapses multiplicatively
    into a single index range.
    """
    if not isinstance(count, numbers.Integral) or isinstance(count, bool) or count < 1:
        raise InvalidCompositionError(f"replication count must be a positive integer, got {count!r}")
    if not isinstance(expr, VariableExpr):
        raise InvalidCompositionError(f"replicate needs a variable expression, got {expr!r}")
    if isinstance(expr, Concat) and len(expr.parts) > 1:
        raise InvalidCompositionError("replication needs a single named operand; bind the group first")
    return Replicate(int(count), expr)


def bind(name: str, expr: VariableExpr) -> Bound:
    """Give a name to a composite expression, creating a branch variable."""
    _check_name(name)
    if not isinstance(expr, VariableExpr):
        raise InvalidCompositionError(f"bind needs a variable expression, got {expr!r}")
    return Bound(name, expr)


# ---------------------------------------------------------------------------
# Built hierarchies


@dataclass(frozen=True)
class ChildSlot:
    """One child entry of a branch: ``count`` copies of ``node`` starting at ``offset``.

    Copy ``i`` occupies ``[offset + i*node.size, offset + (i+1)*node.size)``
    relative to the parent.  ``replicated`` records whether the entry came
    from ``replicate`` and therefore consumes a copy index in queries.
    """

    node: "Hierarchy"
    count: int
    replicated: bool
    offset: int


@dataclass(frozen=True)
class Hierarchy:
    """Immutable variable tree with all sizes and offsets fixed at build time."""

    name: str
    kind: Kind
    size: int
    slots: tuple
    subtree_names: frozenset

    @property
    def is_leaf(self) -> bool:
        return not self.slots

    def __str__(self) -> str:
        return pretty(self)


def _slot_specs(expr: VariableExpr) -> list:
    """Flatten a structural expression into (named expr, count, replicated) entries."""
    out = []
    stack = [(expr, 1, False)]
    while stack:
        e, count, rep = stack.pop()
        if isinstance(e, (Leaf, Bound)):
            out.append((e, count, rep))
        elif isinstance(e, Replicate):
            stack.append((e.expr, count * e.count, True))
        elif isinstance(e, Concat):
            if len(e.parts) == 1:
                stack.append((e.parts[0], count, rep))
            elif count != 1:
                # replicating a group of several parts has no single name to index by
                raise InvalidCompositionError(
                    "replication needs a single named operand; bind the group first"
                )
            else:
                stack.extend(reversed([(p, 1, False) for p in e.parts]))
        else:
            raise InvalidCompositionError(f"not a variable expression: {e!r}")
    return out


def build(expr: VariableExpr) -> Hierarchy:
    """Freeze a named declaration into an immutable, fully indexed hierarchy.

    Building twice yields equal hierarchies.  Siblings under one branch must
    have distinct names; equal names in unrelated subtrees are fine and are
    told apart by longer queries (or flagged ambiguous at resolve time).
    """
    if not isinstance(expr, (Leaf, Bound)):
        raise InvalidCompositionError("the root of a hierarchy must be named; wrap it with bind()")
    built: dict = {}
    stack = [expr]
    while stack:
        e = stack[-1]
        if id(e) in built:
            stack.pop()
            continue
        if isinstance(e, Leaf):
            built[id(e)] = Hierarchy(e.name, e.kind, e.kind.size, (), frozenset((e.name,)))
            stack.pop()
            continue
        specs = _slot_specs(e.expr)
        pending = [s for s, _, _ in specs if id(s) not in built]
        if pending:
            stack.extend(pending)
            continue
        slots = []
        names = set()
        offset = 0
        for sub_expr, count, rep in specs:
            node = built[id(sub_expr)]
            if node.name in names:
                raise DuplicateNameError(
                    f"duplicate sibling name '{node.name}' under '{e.name}'"
                )
            names.add(node.name)
            slots.append(ChildSlot(node, count, rep, offset))
            offset += count * node.size
        sub_names = frozenset({e.name}).union(*(s.node.subtree_names for s in slots))
        built[id(e)] = Hierarchy(e.name, BRANCH, offset, tuple(slots), sub_names)
        stack.pop()
    return built[id(expr)]


# ---------------------------------------------------------------------------
# Queries


@dataclass(frozen=True)
class ResolvedVariable:
    """Answer to a path query, relative to the queried root.

    ``chain`` is the matched root-to-target path as (name, copy index) pairs,
    with ``None`` for non-replicated nodes.
    """

    offset: int
    size: int
    kind: Kind
    chain: tuple


def split_query(query: Sequence[Token]):
    """Validate a token stream and split it into name and index sequences."""
    tokens = tuple(query)
    if not tokens:
        raise InvalidQueryError("queries need at least one name token")
    names, indices = [], []
    for tok in tokens:
        if isinstance(tok, str):
            if not tok:
                raise InvalidQueryError("query names must be nonempty")
            names.append(tok)
        elif isinstance(tok, numbers.Integral) and not isinstance(tok, bool):
            if tok < 0:
                raise InvalidQueryError(f"copy indices must be nonnegative, got {tok}")
            indices.append(int(tok))
        else:
            raise InvalidQueryError(f"query tokens must be names or integers, got {tok!r}")
    if not isinstance(tokens[0], str):
        raise InvalidQueryError("queries must start with a name token")
    return names, indices


def _chain_label(root: Hierarchy, chain_slots) -> str:
    return "/".join([root.name] + [s.node.name for s in chain_slots])


def _matching_chains(root: Hierarchy, names) -> list:
    """All root-to-descendant slot chains whose names embed the query names.

    The query names must appear in order as a subsequence of the chain's
    node names, with the last query name at the chain's end.  Chains are
    node paths: copy indices play no role here.
    """
    last = names[-1]
    prefix = names[:-1]
    # need_sets[k] = names still required once k prefix names are matched
    need_sets = [frozenset(names[k:]) for k in range(len(names))]
    matches = []
    stack = [
        (slot, 0, ())
        for slot in reversed(root.slots)
        if need_sets[0] <= slot.node.subtree_names
    ]
    while stack:
        slot, ptr, parent_path = stack.pop()
        path = parent_path + (slot,)
        if ptr == len(prefix) and slot.node.name == last:
            matches.append(path)
        if ptr < len(prefix) and slot.node.name == prefix[ptr]:
            ptr += 1
        for child in reversed(slot.node.slots):
            if need_sets[ptr] <= child.node.subtree_names:
                stack.append((child, ptr, path))
    return matches


def resolve(root: Hierarchy, query: Sequence[Token]) -> ResolvedVariable:
    """Resolve a (possibly bypassed) query to an offset/size/kind under ``root``.

    Along the matched chain every replicated node consumes one copy index,
    outermost first -- including nodes skipped by the bypass.  Offsets are
    relative to ``root``.
    """
    names, indices = split_query(query)
    matches = _matching_chains(root, names)
    if not matches:
        raise UnknownPathError(
            f"no subvariable chain of '{root.name}' matches names {names}"
        )
    if len(matches) > 1:
        labels = [_chain_label(root, m) for m in matches]
        raise AmbiguousPathError(
            f"names {names} match {len(matches)} chains under '{root.name}': "
            + ", ".join(labels),
            chains=labels,
        )
    chain_slots = matches[0]
    label = _chain_label(root, chain_slots)
    offset = 0
    used = 0
    chain = []
    for slot in chain_slots:
        if slot.replicated:
            if used >= len(indices):
                raise QueryArityError(
                    f"query {list(query)} supplies too few copy indices for chain {label}: "
                    f"'{slot.node.name}' is replicated x{slot.count}"
                )
            idx = indices[used]
            used += 1
            if idx >= slot.count:
                raise IndexOutOfRangeError(
                    f"copy index {idx} out of range for '{slot.node.name}' x{slot.count} in chain {label}"
                )
            offset += slot.offset + idx * slot.node.size
            chain.append((slot.node.name, idx))
        else:
            offset += slot.offset
            chain.append((slot.node.name, None))
    if used < len(indices):
        raise QueryArityError(
            f"query {list(query)} supplies {len(indices)} copy indices "
            f"but chain {label} consumes only {used}"
        )
    target = chain_slots[-1].node
    return ResolvedVariable(offset, target.size, target.kind, tuple(chain))


# ---------------------------------------------------------------------------
# Accessors and debug output


def size_of(h: Hierarchy) -> int:
    return h.size


def kind_of(h: Hierarchy) -> Kind:
    return h.kind


def children_of(h: Hierarchy) -> tuple:
    """Ordered child slots of a node (empty for leaves)."""
    return h.slots


def pretty(h: Hierarchy, indent: str = "  ") -> str:
    """Render the tree as indented ``name[kind,size]@offset xcount`` lines.

    Offsets are relative to the parent; replicated structure is printed once
    with its copy count.
    """
    lines = []
    stack = [(h, 1, 0, 0)]
    while stack:
        node, count, offset, depth = stack.pop()
        lines.append(f"{indent * depth}{node.name}[{node.kind},{node.size}]@{offset} ×{count}")
        for slot in reversed(node.slots):
            stack.append((slot.node, slot.count, slot.offset, depth + 1))
    return "\n".join(lines)
