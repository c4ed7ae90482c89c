"""Summary statistics over detected superbubbles."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import InvariantError, UsageError
from .graph import DirectedMultigraph
from .superbubble import Superbubble
from .unipath import UnipathGraph

SIZE_BUCKETS = ("2", "3-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60+")


def size_bucket(size: int) -> str:
    if size < 2:
        raise UsageError(f"superbubble size must be >= 2, got {size}")
    if size == 2:
        return "2"
    if size < 10:
        return "3-9"
    if size >= 60:
        return "60+"
    lo = size // 10 * 10
    return f"{lo}-{lo + 9}"


def size_histogram(bubbles) -> dict[str, int]:
    hist = dict.fromkeys(SIZE_BUCKETS, 0)
    for b in bubbles:
        hist[size_bucket(b.size)] += 1
    return hist


@dataclass(frozen=True)
class PathStats:
    entrance: int
    exit: int
    size: int
    shortest: int
    longest: int

    @property
    def ratio(self) -> float:
        if self.shortest == 0:
            return math.inf if self.longest else 1.0
        return self.longest / self.shortest


def _edge_lengths(g):
    if isinstance(g, UnipathGraph):
        return g.graph, g.edge_lengths
    if g.is_labeled:
        return g, [len(lab) for lab in g.labels]
    return g, [1] * g.edge_count


def path_length_extremes(g: UnipathGraph | DirectedMultigraph, sb: Superbubble) -> tuple[int, int]:
    """Shortest and longest entrance-to-exit path length inside ``sb``.

    Edge length is the label length (collapsed length for abstract unipath
    graphs, 1 for unlabeled multigraphs).  Parallel edges are separate paths.
    Dynamic programming over a topological order of the induced subgraph.
    """
    graph, lengths = _edge_lengths(g)
    U = sb.vertices
    indeg = dict.fromkeys(U, 0)
    inner = {}
    for v in U:
        inner[v] = [e for e in graph.out_edge_ids(v) if int(graph.dst[e]) in U]
        for e in inner[v]:
            indeg[int(graph.dst[e])] += 1
    order = [v for v in U if indeg[v] == 0]
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for e in inner[v]:
            w = int(graph.dst[e])
            indeg[w] -= 1
            if indeg[w] == 0:
                order.append(w)
    if len(order) != len(U):
        raise InvariantError(f"superbubble <{sb.entrance},{sb.exit}> induces a cycle")

    short = {sb.entrance: 0}
    long = {sb.entrance: 0}
    for v in order:
        if v not in short:
            continue
        for e in inner[v]:
            w = int(graph.dst[e])
            a = short[v] + lengths[e]
            b = long[v] + lengths[e]
            if w not in short or a < short[w]:
                short[w] = a
            if w not in long or b > long[w]:
                long[w] = b
    if sb.exit not in short:
        raise InvariantError(f"exit {sb.exit} unreachable inside <{sb.entrance},{sb.exit}>")
    return short[sb.exit], long[sb.exit]


def path_stats(g, sb: Superbubble) -> PathStats:
    lo, hi = path_length_extremes(g, sb)
    return PathStats(sb.entrance, sb.exit, sb.size, lo, hi)


def ratio_classification(reports, threshold: float = 1.05,
                         min_size: int = 5) -> tuple[int, int, float]:
    """Among superbubbles of size >= min_size, count those with ratio < threshold."""
    if threshold <= 1:
        raise UsageError(f"threshold must exceed 1, got {threshold}")
    eligible = [r for r in reports if r.size >= min_size]
    hits = sum(1 for r in eligible if r.ratio < threshold)
    total = len(eligible)
    return hits, total, (hits / total if total else math.nan)


@dataclass
class SuperbubbleReport:
    histogram: dict
    ratio_stats: list = field(default_factory=list)
    visited_total: int | None = None
    wall_time_seconds: float | None = None
    threshold: float = 1.05
    min_size: int = 5

    @property
    def total(self) -> int:
        return sum(self.histogram.values())

    def to_dict(self) -> dict:
        hits, total, frac = ratio_classification(self.ratio_stats, self.threshold, self.min_size)
        return {
            "superbubbles": self.total,
            "histogram": self.histogram,
            "ratio": {"threshold": self.threshold, "min_size": self.min_size,
                      "below_threshold": hits, "eligible": total,
                      "fraction": None if math.isnan(frac) else frac},
            "ratio_table": [dict(asdict(r), ratio=r.ratio) for r in self.ratio_stats],
            "visited_total": self.visited_total,
            "wall_time_seconds": self.wall_time_seconds,
        }


def build_report(g, bubbles, visited_total=None, wall_time_seconds=None,
                 threshold: float = 1.05, min_size: int = 5) -> SuperbubbleReport:
    stats = [path_stats(g, b) for b in bubbles if b.size >= min_size]
    return SuperbubbleReport(size_histogram(bubbles), stats, visited_total,
                             wall_time_seconds, threshold, min_size)
