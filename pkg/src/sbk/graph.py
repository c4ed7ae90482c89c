"""Directed multigraph with dense integer vertices and labeled edges.

Edges are stored as parallel ``src``/``dst`` arrays plus two CSR indexes
(by source and by target).  Both indexes are built with a stable sort, so
adjacency lists keep insertion order.  The graph is immutable once built.
"""

from __future__ import annotations

import io
import operator
import os
import struct
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .errors import InputFormatError, UsageError

BINARY_MAGIC = b"SBG1"


@dataclass(frozen=True)
class Edge:
    id: int
    source: int
    target: int
    label: str = ""


class DirectedMultigraph:
    """Immutable directed multigraph on vertices ``0 .. vertex_count - 1``.

    Parallel edges and self-loops are allowed.  ``labels`` is either ``None``
    (abstract graph, every label reads as ``""``) or one string per edge.
    """

    def __init__(self, vertex_count: int, sources: Sequence[int] = (),
                 targets: Sequence[int] = (), labels: Sequence[str] | None = None):
        n = operator.index(vertex_count)
        if n < 0:
            raise UsageError(f"vertex_count must be non-negative, got {n}")
        src = np.asarray(sources, dtype=np.int64).reshape(-1)
        dst = np.asarray(targets, dtype=np.int64).reshape(-1)
        if src.shape != dst.shape:
            raise UsageError("sources and targets differ in length")
        if src.size and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
            raise UsageError(f"edge endpoint outside 0..{n - 1}")
        if labels is not None:
            labels = [str(x) for x in labels]
            if len(labels) != src.size:
                raise UsageError("labels must have one entry per edge")
        self._n = n
        self.src = src
        self.dst = dst
        self._labels = labels
        self.src.setflags(write=False)
        self.dst.setflags(write=False)

        self._out_order = np.argsort(src, kind="stable")
        self._in_order = np.argsort(dst, kind="stable")
        self._out_ptr = np.zeros(n + 1, dtype=np.int64)
        self._in_ptr = np.zeros(n + 1, dtype=np.int64)
        if n:
            np.cumsum(np.bincount(src, minlength=n), out=self._out_ptr[1:])
            np.cumsum(np.bincount(dst, minlength=n), out=self._in_ptr[1:])
        self._out_nbr = dst[self._out_order]
        self._in_nbr = src[self._in_order]

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple]) -> "DirectedMultigraph":
        """Build from ``(u, v)`` or ``(u, v, label)`` tuples."""
        src, dst, labels = [], [], []
        labeled = False
        for e in edges:
            src.append(e[0])
            dst.append(e[1])
            if len(e) > 2:
                labeled = True
                labels.append(e[2])
            else:
                labels.append("")
        return cls(vertex_count, src, dst, labels if labeled else None)

    # -- sizes -------------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    @property
    def labels(self) -> list[str] | None:
        return self._labels

    @property
    def is_labeled(self) -> bool:
        return self._labels is not None

    def __repr__(self):
        return f"DirectedMultigraph(vertices={self._n}, edges={self.edge_count})"

    def _vertex(self, v) -> int:
        try:
            v = operator.index(v)
        except TypeError:
            raise UsageError(f"vertex id must be an integer, got {v!r}") from None
        if not 0 <= v < self._n:
            raise UsageError(f"vertex {v} out of range 0..{self._n - 1}")
        return v

    # -- degree and adjacency ---------------------------------------------

    def outdeg(self, v: int) -> int:
        v = self._vertex(v)
        return int(self._out_ptr[v + 1] - self._out_ptr[v])

    def indeg(self, v: int) -> int:
        v = self._vertex(v)
        return int(self._in_ptr[v + 1] - self._in_ptr[v])

    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out_ptr)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self._in_ptr)

    def children(self, v: int) -> list[int]:
        """Targets of v's outgoing edges, with multiplicity, in insertion order."""
        v = self._vertex(v)
        return self._out_nbr[self._out_ptr[v]:self._out_ptr[v + 1]].tolist()

    def parents(self, v: int) -> list[int]:
        v = self._vertex(v)
        return self._in_nbr[self._in_ptr[v]:self._in_ptr[v + 1]].tolist()

    def out_edge_ids(self, v: int) -> list[int]:
        v = self._vertex(v)
        return self._out_order[self._out_ptr[v]:self._out_ptr[v + 1]].tolist()

    def in_edge_ids(self, v: int) -> list[int]:
        v = self._vertex(v)
        return self._in_order[self._in_ptr[v]:self._in_ptr[v + 1]].tolist()

    def out_edges(self, v: int) -> list[Edge]:
        return [self.edge(i) for i in self.out_edge_ids(v)]

    def in_edges(self, v: int) -> list[Edge]:
        return [self.edge(i) for i in self.in_edge_ids(v)]

    def has_edge(self, u: int, v: int) -> bool:
        v = self._vertex(v)
        return v in self.children(u)

    def label(self, edge_id: int) -> str:
        if not 0 <= edge_id < self.edge_count:
            raise UsageError(f"edge {edge_id} out of range")
        return self._labels[edge_id] if self._labels is not None else ""

    def edge(self, edge_id: int) -> Edge:
        edge_id = operator.index(edge_id)
        if not 0 <= edge_id < self.edge_count:
            raise UsageError(f"edge {edge_id} out of range")
        return Edge(edge_id, int(self.src[edge_id]), int(self.dst[edge_id]),
                    self._labels[edge_id] if self._labels is not None else "")

    def edges(self) -> Iterator[Edge]:
        for i in range(self.edge_count):
            yield self.edge(i)

    def csr(self):
        """``(out_ptr, out_nbr, in_ptr, in_nbr)`` int64 arrays for the kernels."""
        return self._out_ptr, self._out_nbr, self._in_ptr, self._in_nbr

    def same_as(self, other: "DirectedMultigraph") -> bool:
        """Structural equality including edge order and labels."""
        return (self._n == other._n
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst)
                and [self.label(i) for i in range(self.edge_count)]
                == [other.label(i) for i in range(other.edge_count)])


# -- text edge list ----------------------------------------------------------

def _open_text(path_or_stream, mode):
    if isinstance(path_or_stream, (str, os.PathLike)):
        return open(path_or_stream, mode, encoding="ascii", newline="\n"), True
    return path_or_stream, False


def read_edge_list(path_or_stream) -> DirectedMultigraph:
    """Parse ``u<TAB>v[<TAB>label]`` records.

    ``#vertices N`` fixes the vertex count; any other ``#`` line is a comment.
    Without the header the vertex count is one more than the largest id.
    """
    fh, owned = _open_text(path_or_stream, "r")
    source = str(path_or_stream) if owned else None
    src, dst, labels = [], [], []
    labeled = False
    declared = None
    try:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "vertices":
                    try:
                        declared = int(parts[1])
                    except ValueError:
                        raise InputFormatError(f"bad vertex count {parts[1]!r}", lineno, source)
                    if declared < 0:
                        raise InputFormatError("negative vertex count", lineno, source)
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3):
                raise InputFormatError(f"expected 2 or 3 tab-separated fields, got {len(fields)}",
                                       lineno, source)
            try:
                u, v = int(fields[0]), int(fields[1])
            except ValueError:
                raise InputFormatError("vertex ids must be integers", lineno, source)
            if u < 0 or v < 0:
                raise InputFormatError("negative vertex id", lineno, source)
            src.append(u)
            dst.append(v)
            if len(fields) == 3:
                labeled = True
                labels.append(fields[2])
            else:
                labels.append("")
    finally:
        if owned:
            fh.close()
    n = (max(max(src), max(dst)) + 1) if src else 0
    if declared is not None:
        if declared < n:
            raise InputFormatError(f"#vertices {declared} but edge uses id {n - 1}", None, source)
        n = declared
    return DirectedMultigraph(n, src, dst, labels if labeled else None)


def write_edge_list(g: DirectedMultigraph, path_or_stream, comments: Sequence[str] = ()) -> None:
    fh, owned = _open_text(path_or_stream, "w")
    try:
        fh.write(f"#vertices {g.vertex_count}\n")
        for c in comments:
            fh.write(f"# {c}\n")
        src, dst = g.src.tolist(), g.dst.tolist()
        if g.is_labeled:
            fh.writelines(f"{u}\t{v}\t{lab}\n" for u, v, lab in zip(src, dst, g.labels))
        else:
            fh.writelines(f"{u}\t{v}\n" for u, v in zip(src, dst))
    finally:
        if owned:
            fh.close()


def read_names(path_or_stream) -> list[str]:
    """Read an ``id<TAB>name`` side table; ids must be exactly 0..N-1."""
    fh, owned = _open_text(path_or_stream, "r")
    source = str(path_or_stream) if owned else None
    names = {}
    try:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise InputFormatError("expected id<TAB>name", lineno, source)
            try:
                names[int(fields[0])] = fields[1]
            except ValueError:
                raise InputFormatError("id must be an integer", lineno, source)
    finally:
        if owned:
            fh.close()
    if sorted(names) != list(range(len(names))):
        raise InputFormatError("name ids are not a dense 0..N-1 range", None, source)
    return [names[i] for i in range(len(names))]


def write_names(names: Sequence[str], path_or_stream) -> None:
    fh, owned = _open_text(path_or_stream, "w")
    try:
        fh.writelines(f"{i}\t{name}\n" for i, name in enumerate(names))
    finally:
        if owned:
            fh.close()


# -- binary format -----------------------------------------------------------
# magic "SBG1", then little-endian: int64 n, int64 m, uint8 labeled,
# int64[m] src, int64[m] dst, and if labeled: uint32[m] label lengths
# followed by the concatenated ASCII label bytes.

def write_binary(g: DirectedMultigraph, path_or_stream) -> None:
    owned = isinstance(path_or_stream, (str, os.PathLike))
    fh: IO[bytes] = open(path_or_stream, "wb") if owned else path_or_stream
    try:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<qqB", g.vertex_count, g.edge_count, int(g.is_labeled)))
        fh.write(g.src.astype("<i8").tobytes())
        fh.write(g.dst.astype("<i8").tobytes())
        if g.is_labeled:
            encoded = [lab.encode("ascii") for lab in g.labels]
            fh.write(np.array([len(b) for b in encoded], dtype="<u4").tobytes())
            fh.write(b"".join(encoded))
    finally:
        if owned:
            fh.close()


def read_binary(path_or_stream) -> DirectedMultigraph:
    owned = isinstance(path_or_stream, (str, os.PathLike))
    fh: IO[bytes] = open(path_or_stream, "rb") if owned else path_or_stream
    source = str(path_or_stream) if owned else None
    try:
        data = fh.read()
    finally:
        if owned:
            fh.close()
    if data[:4] != BINARY_MAGIC:
        raise InputFormatError("missing SBG1 header", None, source)
    head = struct.calcsize("<qqB")
    if len(data) < 4 + head:
        raise InputFormatError("truncated header", None, source)
    n, m, labeled = struct.unpack_from("<qqB", data, 4)
    pos = 4 + head
    need = pos + 16 * m + (4 * m if labeled else 0)
    if n < 0 or m < 0 or len(data) < need:
        raise InputFormatError("truncated edge arrays", None, source)
    src = np.frombuffer(data, dtype="<i8", count=m, offset=pos).astype(np.int64)
    pos += 8 * m
    dst = np.frombuffer(data, dtype="<i8", count=m, offset=pos).astype(np.int64)
    pos += 8 * m
    labels = None
    if labeled:
        lengths = np.frombuffer(data, dtype="<u4", count=m, offset=pos)
        pos += 4 * m
        if len(data) != pos + int(lengths.sum()):
            raise InputFormatError("label block size mismatch", None, source)
        blob = data[pos:].decode("ascii")
        ends = np.cumsum(lengths).tolist()
        starts = [0] + ends[:-1]
        labels = [blob[a:b] for a, b in zip(starts, ends)]
    try:
        return DirectedMultigraph(n, src, dst, labels)
    except UsageError as exc:
        raise InputFormatError(str(exc), None, source) from None


def load_graph(path) -> DirectedMultigraph:
    """Read a graph file, choosing binary or text by its first bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == BINARY_MAGIC:
        return read_binary(path)
    return read_edge_list(path)


def save_graph(g: DirectedMultigraph, path, comments: Sequence[str] = ()) -> None:
    """Write binary when ``path`` ends in ``.sbg``, text edge list otherwise."""
    if str(path).endswith(".sbg"):
        write_binary(g, path)
    else:
        write_edge_list(g, path, comments)


def edge_list_text(g: DirectedMultigraph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()
