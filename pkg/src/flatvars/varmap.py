"""Flat scalar buffers bound to hierarchies, served through aliasing views.

A map associates a built hierarchy with one contiguous float array.  Views
are windows into that array -- no copies, ever: writing through any view is
immediately visible through every overlapping view and through the raw
buffer.  The eager map precomputes a view for every addressable chain at
construction, so lookups afterwards are single dict hits; the lazy map
computes (offset, size) on demand and is nearly free to construct.

Quaternion views use (x, y, z, w) storage order; the identity rotation
reads (0, 0, 0, 1).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import SizeMismatchError
from .variables import BRANCH, Hierarchy, Kind, pretty, resolve


def new_buffer(hierarchy: Hierarchy, dtype=np.float64) -> np.ndarray:
    """Zero-initialized buffer sized for ``hierarchy``."""
    return np.zeros(hierarchy.size, dtype=dtype)


def _check_buffer(hierarchy: Hierarchy, buffer) -> np.ndarray:
    buffer = np.asarray(buffer)
    if buffer.ndim != 1:
        raise SizeMismatchError(f"buffers must be one-dimensional, got shape {buffer.shape}")
    if buffer.shape[0] != hierarchy.size:
        raise SizeMismatchError(
            f"buffer has {buffer.shape[0]} scalars but '{hierarchy.name}' needs {hierarchy.size}"
        )
    return buffer


# ---------------------------------------------------------------------------
# Views


class View:
    """Aliasing window of a buffer: ``array`` is a live numpy slice."""

    __slots__ = ("array", "offset", "size", "kind")

    def __init__(self, buffer: np.ndarray, offset: int, size: int, kind: Kind):
        self.array = buffer[offset : offset + size]
        self.offset = offset
        self.size = size
        self.kind = kind

    @property
    def descriptor(self):
        return (self.offset, self.size, self.kind)

    def read(self) -> np.ndarray:
        return self.array.copy()

    def write(self, values) -> None:
        values = np.atleast_1d(np.asarray(values, dtype=self.array.dtype))
        if values.shape != (self.size,):
            raise SizeMismatchError(
                f"view holds {self.size} scalars, cannot write shape {values.shape}"
            )
        self.array[:] = values

    def set_zero(self) -> None:
        self.array[:] = 0.0

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"{type(self).__name__}(offset={self.offset}, size={self.size})"


class ScalarView(View):
    @property
    def value(self) -> float:
        return float(self.array[0])

    @value.setter
    def value(self, v) -> None:
        self.array[0] = v


class VectorView(View):
    pass


class QuaternionView(View):
    """Unit quaternion window in (x, y, z, w) order."""

    def set_identity(self) -> None:
        self.array[:] = (0.0, 0.0, 0.0, 1.0)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array))


class SpanView(View):
    """Window over a whole branch subtree."""


_VIEW_CLASSES = {
    "scalar": ScalarView,
    "vector": VectorView,
    "quaternion": QuaternionView,
    "branch": SpanView,
}


def make_view(buffer: np.ndarray, offset: int, size: int, kind: Kind) -> View:
    return _VIEW_CLASSES[kind.tag](buffer, offset, size, kind)


# ---------------------------------------------------------------------------
# Maps


def _chain_key(chain) -> tuple:
    key = []
    for name, idx in chain:
        key.append(name)
        if idx is not None:
            key.append(idx)
    return tuple(key)


class EagerMap:
    """Map with a view precomputed for every addressable chain.

    Owns its (zero-initialized) buffer.  ``get`` on a canonical query -- names
    in chain order, each replicated name followed by its copy index -- is a
    plain table hit; bypassed queries are normalized through ``resolve`` once
    and then served from the same table.
    """

    def __init__(self, hierarchy: Hierarchy, dtype=np.float64):
        self.hierarchy = hierarchy
        self._buffer = new_buffer(hierarchy, dtype)
        table = {}
        stack = [(hierarchy, 0, ())]
        while stack:
            node, base, key = stack.pop()
            for slot in node.slots:
                copies = range(slot.count) if slot.replicated else (None,)
                for copy in copies:
                    offset = base + slot.offset + (copy or 0) * slot.node.size
                    child_key = key + ((slot.node.name, copy) if copy is not None else (slot.node.name,))
                    table[child_key] = make_view(self._buffer, offset, slot.node.size, slot.node.kind)
                    stack.append((slot.node, offset, child_key))
        self._table = table

    @property
    def buffer(self) -> np.ndarray:
        return self._buffer

    def get(self, *query) -> View:
        view = self._table.get(query)
        if view is not None:
            return view
        resolved = resolve(self.hierarchy, query)
        return self._table[_chain_key(resolved.chain)]

    def keys(self):
        """All canonical chains, in no particular order."""
        return self._table.keys()

    def __len__(self) -> int:
        return len(self._table)


class LazyMap:
    """Map over a borrowed buffer; views are computed per query.

    Resolution touches only integers (offsets and sizes); scalar data is
    never copied.
    """

    def __init__(self, hierarchy: Hierarchy, buffer):
        self.hierarchy = hierarchy
        self._buffer = _check_buffer(hierarchy, buffer)

    @property
    def buffer(self) -> np.ndarray:
        return self._buffer

    def get(self, *query) -> View:
        resolved = resolve(self.hierarchy, query)
        return make_view(self._buffer, resolved.offset, resolved.size, resolved.kind)


def make_eager_map(hierarchy: Hierarchy, dtype=np.float64) -> EagerMap:
    return EagerMap(hierarchy, dtype)


def make_lazy_map(hierarchy: Hierarchy, buffer) -> LazyMap:
    return LazyMap(hierarchy, buffer)


# ---------------------------------------------------------------------------
# Buffer import/export (binary little-endian dump + text sidecar header)


def _header_path(path: Path) -> Path:
    return Path(str(path) + ".hdr")


def export_buffer(path, buffer: np.ndarray, hierarchy: Hierarchy) -> None:
    """Dump ``buffer`` as little-endian scalars plus a ``.hdr`` sidecar."""
    path = Path(path)
    buffer = _check_buffer(hierarchy, buffer)
    width = buffer.dtype.itemsize
    if width not in (4, 8):
        raise SizeMismatchError(f"only 4- and 8-byte scalars are supported, got {buffer.dtype}")
    path.write_bytes(np.ascontiguousarray(buffer, dtype=f"<f{width}").tobytes())
    header = (
        f"scalar_width={width}\n"
        f"length={buffer.shape[0]}\n"
        "hierarchy=\n"
        f"{pretty(hierarchy)}\n"
    )
    _header_path(path).write_text(header, encoding="utf-8")


def import_buffer(path, hierarchy: Hierarchy) -> np.ndarray:
    """Load a buffer dumped by :func:`export_buffer`, validating the header."""
    path = Path(path)
    lines = _header_path(path).read_text(encoding="utf-8").splitlines()
    fields = dict(line.split("=", 1) for line in lines[:2])
    width = int(fields["scalar_width"])
    length = int(fields["length"])
    tree_text = "\n".join(lines[3:])
    if tree_text != pretty(hierarchy):
        raise SizeMismatchError(f"header hierarchy does not match '{hierarchy.name}'")
    if length != hierarchy.size:
        raise SizeMismatchError(
            f"header length {length} does not match hierarchy size {hierarchy.size}"
        )
    raw = path.read_bytes()
    if len(raw) != length * width:
        raise SizeMismatchError(
            f"payload holds {len(raw)} bytes, expected {length * width}"
        )
    return np.frombuffer(raw, dtype=f"<f{width}").astype(f"=f{width}")
