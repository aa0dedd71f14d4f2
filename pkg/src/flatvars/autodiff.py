"""Vectorized forward-mode differentiation over flat buffers.

A :class:`Dual` carries a value array and a stack of directional
derivatives (one trailing axis, one column per direction).  Seeding the
identity therefore yields a dense Jacobian in a single evaluation.  The
functions being differentiated must depend on one flat input buffer and be
written with the generic helpers below (``sin``, ``cross``, ``where``, ...),
which accept plain arrays and duals alike -- evaluation with all derivative
parts zero is bit-identical to plain evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvaluationError, SizeMismatchError


def _col(c):
    """Broadcast helper: append a directions axis to a constant factor."""
    c = np.asarray(c, dtype=float)
    return c[..., None] if c.ndim else c


class Dual:
    """Value array plus directional derivatives (shape ``val.shape + (ndir,)``)."""

    __slots__ = ("val", "dot")
    __array_ufunc__ = None  # force numpy to defer to the reflected operators

    def __init__(self, val, dot):
        self.val = np.asarray(val, dtype=float)
        self.dot = np.asarray(dot, dtype=float)
        if self.dot.shape[:-1] != self.val.shape:
            raise SizeMismatchError(
                f"derivative shape {self.dot.shape} does not extend value shape {self.val.shape}"
            )

    @classmethod
    def seed(cls, val, directions=None) -> "Dual":
        """Input dual for a 1-D buffer; defaults to the identity seed."""
        val = np.asarray(val, dtype=float)
        if directions is None:
            directions = np.eye(val.shape[0])
        return cls(val, directions)

    @property
    def ndir(self) -> int:
        return self.dot.shape[-1]

    def constant_like(self, c) -> "Dual":
        c = np.asarray(c, dtype=float)
        return Dual(c, np.zeros(c.shape + (self.ndir,)))

    # -- indexing -----------------------------------------------------------

    def __getitem__(self, key) -> "Dual":
        return Dual(self.val[key], self.dot[key])

    def __len__(self) -> int:
        return len(self.val)

    def sum(self) -> "Dual":
        axes = tuple(range(self.val.ndim))
        return Dual(self.val.sum(), self.dot.sum(axis=axes) if axes else self.dot)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.dot + other.dot)
        return Dual(self.val + np.asarray(other, dtype=float), self.dot + np.zeros_like(_col(other)))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.dot - other.dot)
        return Dual(self.val - np.asarray(other, dtype=float), self.dot + np.zeros_like(_col(other)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return Dual(-self.val, -self.dot)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.val * other.val,
                self.dot * _col(other.val) + _col(self.val) * other.dot,
            )
        c = np.asarray(other, dtype=float)
        return Dual(self.val * c, self.dot * _col(c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            val = self.val / other.val
            return Dual(val, (self.dot - _col(val) * other.dot) / _col(other.val))
        c = np.asarray(other, dtype=float)
        return Dual(self.val / c, self.dot / _col(c))

    def __rtruediv__(self, other):
        c = np.asarray(other, dtype=float)
        val = c / self.val
        return Dual(val, -_col(val / self.val) * self.dot)

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("dual exponents are not supported")
        val = self.val**exponent
        return Dual(val, _col(exponent * self.val ** (exponent - 1)) * self.dot)

    def __repr__(self):
        return f"Dual(val={self.val!r}, ndir={self.ndir})"


def _coerce(x, like: Dual) -> Dual:
    return x if isinstance(x, Dual) else like.constant_like(x)


def value_of(x) -> np.ndarray:
    """Plain value part of a dual, or the array itself."""
    return x.val if isinstance(x, Dual) else np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# Generic math (ndarray or Dual)


def sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.val), _col(np.cos(x.val)) * x.dot)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.val), -_col(np.sin(x.val)) * x.dot)
    return np.cos(x)


def sqrt(x):
    if isinstance(x, Dual):
        root = np.sqrt(x.val)
        return Dual(root, x.dot * _col(0.5 / root))
    return np.sqrt(x)


def arctan2(y, x):
    if not isinstance(y, Dual) and not isinstance(x, Dual):
        return np.arctan2(y, x)
    some = y if isinstance(y, Dual) else x
    y = _coerce(y, some)
    x = _coerce(x, some)
    denom = x.val * x.val + y.val * y.val
    return Dual(
        np.arctan2(y.val, x.val),
        (_col(x.val) * y.dot - _col(y.val) * x.dot) / _col(denom),
    )


def where(cond, a, b):
    """Branch on a plain boolean condition; both sides are evaluated."""
    cond = np.asarray(cond)
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.where(cond, a, b)
    some = a if isinstance(a, Dual) else b
    a = _coerce(a, some)
    b = _coerce(b, some)
    return Dual(np.where(cond, a.val, b.val), np.where(cond[..., None], a.dot, b.dot))


def concat(parts):
    """1-D concatenation of arrays and/or duals."""
    duals = [p for p in parts if isinstance(p, Dual)]
    if not duals:
        return np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in parts])
    like = duals[0]
    coerced = [_coerce(np.atleast_1d(p) if not isinstance(p, Dual) else p, like) for p in parts]
    return Dual(
        np.concatenate([p.val for p in coerced]),
        np.concatenate([p.dot for p in coerced], axis=0),
    )


def dot(a, b):
    """Inner product of 1-D operands."""
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return float(np.dot(a, b))
    return (a * b).sum()


def cross(a, b):
    """Cross product of 3-vectors."""
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.cross(a, b)
    return concat(
        [
            a[1:2] * b[2:3] - a[2:3] * b[1:2],
            a[2:3] * b[0:1] - a[0:1] * b[2:3],
            a[0:1] * b[1:2] - a[1:2] * b[0:1],
        ]
    )


def norm(a):
    return sqrt(dot(a, a))


# ---------------------------------------------------------------------------
# Jacobians and gradients


@dataclass(frozen=True)
class DiffFunction:
    """Function of one flat buffer with declared arity, generic over duals."""

    n_in: int
    n_out: int
    fn: Callable

    def __call__(self, x):
        return self.fn(x)


def _evaluate_seeded(f, at):
    at = np.asarray(at, dtype=float)
    if isinstance(f, DiffFunction) and at.shape[0] != f.n_in:
        raise SizeMismatchError(f"function expects {f.n_in} inputs, got {at.shape[0]}")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = f(Dual.seed(at))
    if isinstance(out, Dual):
        val, jac = out.val, out.dot
    else:
        val = np.asarray(out, dtype=float)
        jac = np.zeros(val.shape + (at.shape[0],))
    if isinstance(f, DiffFunction) and np.atleast_1d(val).shape[0] != f.n_out:
        raise SizeMismatchError(
            f"function declared {f.n_out} outputs, produced {np.atleast_1d(val).shape[0]}"
        )
    if not (np.all(np.isfinite(val)) and np.all(np.isfinite(jac))):
        raise EvaluationError(f"non-finite output when differentiating at {at!r}")
    return val, jac


def jacobian(f, at) -> np.ndarray:
    """Dense Jacobian (outputs x inputs) by one multi-directional forward pass."""
    _, jac = _evaluate_seeded(f, at)
    return np.atleast_2d(jac)


def gradient(f, at) -> np.ndarray:
    """Gradient of a scalar-valued function over a flat buffer."""
    val, jac = _evaluate_seeded(f, at)
    if np.ndim(val) > 1 or np.size(val) != 1:
        raise SizeMismatchError(f"gradient needs a scalar-valued function, got shape {np.shape(val)}")
    return jac.reshape(-1)


def value_and_jacobian(f, at):
    val, jac = _evaluate_seeded(f, at)
    return val, np.atleast_2d(jac)
