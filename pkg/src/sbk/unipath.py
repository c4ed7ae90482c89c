"""Collapse maximal non-branching chains into single labeled edges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .debruijn import DeBruijnGraph
from .errors import InvariantError, UsageError
from .graph import DirectedMultigraph, Edge


@dataclass
class UnipathGraph:
    graph: DirectedMultigraph
    origin_ids: np.ndarray          # unipath vertex -> vertex id in the source graph
    origin_names: dict[int, str]    # unipath vertex -> (k-1)-mer, empty for abstract graphs
    edge_lengths: list[int]

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    @property
    def names(self) -> list[str] | None:
        if not self.origin_names:
            return None
        return [self.origin_names[v] for v in range(self.graph.vertex_count)]


def compact(dbg: DeBruijnGraph | DirectedMultigraph, names=None) -> UnipathGraph:
    """Build the unipath graph.

    Kept vertices: every vertex whose indegree or outdegree differs from one
    (branching vertices, plus chain ends with degree zero on one side).  Each
    walk from a kept vertex through degree-(1,1) vertices becomes one edge
    whose label concatenates the walked labels.  A cycle made only of
    degree-(1,1) vertices keeps its lowest-id vertex, which gets a self-loop
    carrying the whole cycle.

    For unlabeled input, ``edge_lengths`` counts collapsed edges instead of
    label characters.
    """
    if isinstance(dbg, DeBruijnGraph):
        g, names = dbg.graph, dbg.node_names
    else:
        g = dbg
    n = g.vertex_count
    if names is not None and len(names) != n:
        raise UsageError("names must have one entry per vertex")
    out_ptr, _, _, _ = g.csr()
    outdeg = g.out_degrees()
    indeg = g.in_degrees()
    keep = (outdeg != 1) | (indeg != 1)
    labels = g.labels
    dst = g.dst.tolist()
    # the single out-edge of each degree-(1,1) vertex
    out_order = np.argsort(g.src, kind="stable")
    first_out = np.full(n, -1, dtype=np.int64)
    has_out = outdeg > 0
    first_out[has_out] = out_order[out_ptr[:-1][has_out]]
    first_out = first_out.tolist()
    keep_list = keep.tolist()

    consumed = [False] * g.edge_count
    new_edges = []   # (orig source, orig target, label parts, edge count)

    def walk(e):
        parts, count = [], 0
        while True:
            consumed[e] = True
            count += 1
            if labels is not None:
                parts.append(labels[e])
            w = dst[e]
            if keep_list[w]:
                return w, parts, count
            e = first_out[w]
            if consumed[e]:
                raise InvariantError("chain walk re-entered a consumed edge")

    for u in np.flatnonzero(keep).tolist():
        for e in g.out_edge_ids(u):
            w, parts, count = walk(e)
            new_edges.append((u, w, parts, count))

    for v in range(n):
        if keep_list[v]:
            continue
        e = first_out[v]
        if consumed[e]:
            continue
        # v is the lowest id on an isolated non-branching cycle
        keep_list[v] = True
        _, parts, count = walk(e)
        new_edges.append((v, v, parts, count))

    kept = [v for v in range(n) if keep_list[v]]
    remap = {v: i for i, v in enumerate(kept)}
    new_edges.sort(key=lambda t: remap[t[0]])   # stable: keeps per-source order
    g2 = DirectedMultigraph(
        len(kept),
        [remap[u] for u, _, _, _ in new_edges],
        [remap[w] for _, w, _, _ in new_edges],
        ["".join(p) for _, _, p, _ in new_edges] if labels is not None else None,
    )
    if labels is not None:
        lengths = [len(g2.label(i)) for i in range(g2.edge_count)]
    else:
        lengths = [c for _, _, _, c in new_edges]
    origin_names = {i: names[v] for i, v in enumerate(kept)} if names is not None else {}
    return UnipathGraph(graph=g2, origin_ids=np.array(kept, dtype=np.int64),
                        origin_names=origin_names, edge_lengths=lengths)


def edge_label_length(ug: UnipathGraph, e: Edge | int) -> int:
    """Length of a unipath edge's label (its collapsed length for abstract graphs)."""
    g = ug.graph
    if isinstance(e, Edge):
        if not 0 <= e.id < g.edge_count or g.edge(e.id) != e:
            raise UsageError(f"edge {e} does not belong to this graph")
        e = e.id
    if not 0 <= e < g.edge_count:
        raise UsageError(f"edge {e} out of range")
    return ug.edge_lengths[e]
