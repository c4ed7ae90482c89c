"""Brute-force superbubble checker, written for obviousness rather than speed.

Each of the four conditions (reachability, matching, acyclicity, minimality)
is evaluated directly from its definition.  "Passing through" a vertex means
entering it and leaving again, so a barrier vertex can be reached but is
never expanded.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UsageError
from .graph import DirectedMultigraph
from .superbubble import Superbubble

DEFAULT_MAX_VERTICES = 16


@dataclass(frozen=True)
class Verdict:
    reachability: bool
    matching: bool
    acyclicity: bool
    minimality: bool
    vertex_set: frozenset

    @property
    def ok(self) -> bool:
        return self.reachability and self.matching and self.acyclicity and self.minimality

    def as_dict(self):
        return {"superbubble": self.ok, "reachability": self.reachability,
                "matching": self.matching, "acyclicity": self.acyclicity,
                "minimality": self.minimality, "vertices": sorted(self.vertex_set)}


def reachable_without_passing(g: DirectedMultigraph, start: int, barrier: int,
                              direction: str = "forward") -> set[int]:
    if start == barrier:
        raise UsageError("start and barrier must differ")
    start, barrier = g._vertex(start), g._vertex(barrier)
    if direction == "forward":
        step = g.children
    elif direction == "backward":
        step = g.parents
    else:
        raise UsageError(f"direction must be 'forward' or 'backward', got {direction!r}")
    reached = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        if x == barrier:
            continue
        for y in step(x):
            if y not in reached:
                reached.add(y)
                stack.append(y)
    return reached


def is_acyclic(g: DirectedMultigraph, vertices) -> bool:
    """True when the subgraph induced by ``vertices`` has no cycle (self-loops count)."""
    vertices = set(vertices)
    indeg = {v: 0 for v in vertices}
    for v in vertices:
        for u in g.children(v):
            if u in vertices:
                indeg[u] += 1
    ready = [v for v, d in indeg.items() if d == 0]
    removed = 0
    while ready:
        v = ready.pop()
        removed += 1
        for u in g.children(v):
            if u in vertices:
                indeg[u] -= 1
                if indeg[u] == 0:
                    ready.append(u)
    return removed == len(vertices)


def _first_three(g, s, t):
    to_set = reachable_without_passing(g, s, t, "forward")
    from_set = reachable_without_passing(g, t, s, "backward")
    reach = t in to_set
    matching = to_set == from_set
    acyclic = is_acyclic(g, to_set)
    return reach, matching, acyclic, frozenset(to_set)


def is_superbubble(g: DirectedMultigraph, s: int, t: int) -> Verdict:
    """Evaluate all four conditions for the ordered pair ``(s, t)``."""
    if s == t:
        raise UsageError("entrance and exit must differ")
    reach, matching, acyclic, U = _first_three(g, s, t)
    minimal = True
    for t2 in sorted(U - {s, t}):
        if all(_first_three(g, s, t2)[:3]):
            minimal = False
            break
    return Verdict(reach, matching, acyclic, minimal, U)


def enumerate_brute_force(g: DirectedMultigraph,
                          max_vertices: int = DEFAULT_MAX_VERTICES) -> list[Superbubble]:
    """Test every ordered pair; refuses graphs above ``max_vertices``."""
    n = g.vertex_count
    if n > max_vertices:
        raise UsageError(f"graph has {n} vertices, oracle bound is {max_vertices}")
    found = []
    for s in range(n):
        for t in range(n):
            if s == t:
                continue
            # minimality only matters once the other three hold
            reach, matching, acyclic, U = _first_three(g, s, t)
            if not (reach and matching and acyclic):
                continue
            if is_superbubble(g, s, t).ok:
                found.append(Superbubble(s, t, U - {s, t}))
    found.sort(key=Superbubble.key)
    return found
