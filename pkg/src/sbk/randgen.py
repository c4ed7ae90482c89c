"""Random graphs for testing, and the branching-process cost model.

The cost model treats the region explored from one entrance as a
Galton-Watson tree: a vertex is "good" (indegree one) with probability p,
and a good vertex has i children with probability p_i.  The mean offspring
is r = p * sum(i * p_i) and the expected tree size is 1 / (1 - r) for r < 1.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .graph import DirectedMultigraph
from .oracle import enumerate_brute_force, is_superbubble
from .superbubble import Superbubble

DEFAULT_MAX_NODES = 10**7
MAX_CHILDREN = 8
_BLOCK = 1 << 16


@dataclass(frozen=True)
class BranchingModel:
    p: float
    child_dist: dict = field(default_factory=dict)   # i -> p_i

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise UsageError(f"p must lie in [0, 1], got {self.p}")
        dist = {int(i): float(q) for i, q in self.child_dist.items()}
        if any(i < 0 for i in dist):
            raise UsageError("child counts must be non-negative")
        if any(q < 0 for q in dist.values()):
            raise UsageError("child probabilities must be non-negative")
        if abs(sum(dist.values()) - 1.0) > 1e-9:
            raise UsageError(f"child probabilities sum to {sum(dist.values())}, not 1")
        object.__setattr__(self, "child_dist", dict(sorted(dist.items())))

    @property
    def r(self) -> float:
        return self.p * sum(i * q for i, q in self.child_dist.items())

    @classmethod
    def parse(cls, p: float, dist: str) -> "BranchingModel":
        """Build from a ``"i:p_i,..."`` string, e.g. ``"0:0.2,1:0.5,2:0.3"``."""
        out = {}
        try:
            for item in dist.split(","):
                if item.strip():
                    i, q = item.split(":")
                    out[int(i)] = out.get(int(i), 0.0) + float(q)
        except ValueError:
            raise UsageError(f"cannot parse distribution {dist!r}") from None
        return cls(p, out)


def expected_tree_size(model: BranchingModel) -> float:
    """1 / (1 - r), or ``math.inf`` when r >= 1."""
    r = model.r
    return math.inf if r >= 1.0 else 1.0 / (1.0 - r)


def _certain_single_child(model):
    return model.p == 1.0 and model.child_dist.get(1, 0.0) == 1.0


def _simulate_block(model, trials, rng, max_nodes):
    sizes = np.ones(trials, dtype=np.int64)
    if _certain_single_child(model):
        # an infinite chain with probability one
        sizes[:] = -1
        return sizes
    ks = np.array(list(model.child_dist), dtype=np.int64)
    ps = np.array(list(model.child_dist.values()), dtype=np.float64)
    ps = ps / ps.sum()
    current = np.ones(trials, dtype=np.int64)
    active = np.arange(trials)
    truncated = np.zeros(trials, dtype=bool)
    while active.size:
        good = rng.binomial(current[active], model.p)
        kids = rng.multinomial(good, ps) @ ks
        sizes[active] += kids
        over = sizes[active] > max_nodes
        truncated[active[over]] = True
        current[active] = kids
        active = active[(kids > 0) & ~over]
    sizes[truncated] = -1
    return sizes


def simulate_gw_sizes(model: BranchingModel, trials: int, seed: int = 0,
                      max_nodes: int = DEFAULT_MAX_NODES, threads: int = 1) -> np.ndarray:
    """Total progeny of ``trials`` independent trees; ``-1`` marks truncation.

    Trials run in fixed blocks, each seeded from its own child of
    ``SeedSequence(seed)``, so the output does not depend on ``threads``.
    """
    if max_nodes < 1:
        raise UsageError("max_nodes must be >= 1")
    if trials < 0:
        raise UsageError("trials must be >= 0")
    nblocks = -(-trials // _BLOCK)
    seqs = np.random.SeedSequence(seed).spawn(nblocks)
    counts = [min(_BLOCK, trials - i * _BLOCK) for i in range(nblocks)]

    def run(i):
        return _simulate_block(model, counts[i], np.random.default_rng(seqs[i]), max_nodes)

    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, range(nblocks)))
    else:
        parts = [run(i) for i in range(nblocks)]
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def simulate_gw_tree(model: BranchingModel, seed: int = 0,
                     max_nodes: int = DEFAULT_MAX_NODES) -> int | None:
    """Size of one tree, or ``None`` if it grew past ``max_nodes``."""
    size = int(simulate_gw_sizes(model, 1, seed, max_nodes)[0])
    return None if size < 0 else size


def gw_summary(model: BranchingModel, sizes: np.ndarray) -> dict:
    done = sizes[sizes >= 0]
    n = done.size
    mean = float(done.mean()) if n else math.nan
    var = float(done.var(ddof=1)) if n > 1 else math.nan
    return {
        "r": model.r,
        "trials": int(sizes.size),
        "truncated": int(sizes.size - n),
        "mean": mean,
        "variance": var,
        "stderr": math.sqrt(var / n) if n > 1 else math.nan,
        "expected": expected_tree_size(model),
    }


def estimate_model_from_graph(g: DirectedMultigraph) -> BranchingModel:
    """p = share of vertices with indegree 1; p_i = share with outdegree i."""
    n = g.vertex_count
    if n == 0:
        raise UsageError("cannot estimate a model from an empty graph")
    indeg = g.in_degrees()
    outdeg = g.out_degrees()
    p = float(np.count_nonzero(indeg == 1)) / n
    values, counts = np.unique(outdeg, return_counts=True)
    dist = {int(i): c / n for i, c in zip(values.tolist(), counts.tolist())}
    return BranchingModel(p, dist)


# -- random graphs -------------------------------------------------------------

def random_small_graph(seed: int, min_vertices: int = 2, max_vertices: int = 12) -> DirectedMultigraph:
    """Small multigraph for oracle comparisons.

    Half the draws are uniform multigraphs with density anywhere from sparse to
    beyond complete (self-loops and parallel edges included); the other half
    are relabeled DAGs with a couple of arbitrary extra edges, which is where
    superbubbles actually show up.
    """
    rng = random.Random(seed)
    n = rng.randint(min_vertices, max_vertices)
    edges = []
    if rng.random() < 0.5:
        m = rng.randint(0, int(n * n * rng.uniform(0.05, 1.2)) + 1)
        edges = [(rng.randrange(n), rng.randrange(n)) for _ in range(m)]
    else:
        for _ in range(rng.randint(n - 1, 3 * n)):
            a, b = sorted(rng.sample(range(n), 2))
            edges.append((a, b))
        for _ in range(rng.randint(0, 2)):
            edges.append((rng.randrange(n), rng.randrange(n)))
        perm = list(range(n))
        rng.shuffle(perm)
        edges = [(perm[a], perm[b]) for a, b in edges]
    return DirectedMultigraph.from_edges(n, edges)


DEFAULT_OUT_DIST = {0: 0.05, 1: 0.25, 2: 0.5, 3: 0.15, 4: 0.05}


def random_unipath_like(n: int, seed: int = 0, out_dist: dict | None = None,
                        window: int = 64) -> DirectedMultigraph:
    """Sparse graph with bounded branching and local edges.

    Out-degrees follow ``out_dist``; each target lies within ``window`` ids of
    its source (wrapping around), which keeps memory access local the way a
    genome-ordered graph would.  The default distribution has mean 1.9 edges
    per vertex, close to real unipath graphs.
    """
    if n < 2:
        raise UsageError("need at least 2 vertices")
    dist = out_dist or DEFAULT_OUT_DIST
    if max(dist) > MAX_CHILDREN:
        raise UsageError(f"out-degree above {MAX_CHILDREN}")
    rng = np.random.default_rng(seed)
    ks = np.array(list(dist), dtype=np.int64)
    ps = np.array(list(dist.values()), dtype=np.float64)
    outdeg = rng.choice(ks, size=n, p=ps / ps.sum())
    src = np.repeat(np.arange(n, dtype=np.int64), outdeg)
    w = min(window, n - 1)
    offset = rng.integers(1, w + 1, size=src.size) * rng.choice([-1, 1], size=src.size)
    dst = (src + offset) % n
    return DirectedMultigraph(n, src, dst)


@dataclass
class PlantedRegion:
    """A structure hung between one entrance (local 0) and one exit (local size-1).

    ``edges`` uses local ids; when omitted a random DAG is drawn whose
    entrance/exit pair is itself a superbubble.
    """
    size: int = 4
    edges: list | None = None
    density: float = 0.25


@dataclass
class PlantedGraphSpec:
    """Background graph plus planted regions.

    Every background vertex gets ``background_parents`` distinct background
    in-neighbours, every entrance gets the same, and every exit gets
    ``exit_children`` background out-neighbours.  With at least two distinct
    parents nowhere, no search can walk into the background, so the
    superbubbles are exactly those inside the regions.

    ``extra_edges`` use layout ids (background first, then each region's
    vertices in order) and are applied before the optional shuffle.
    """
    background_vertices: int = 0
    planted: list = field(default_factory=list)
    seed: int = 0
    background_parents: int = 2
    exit_children: int = 2
    extra_edges: list = field(default_factory=list)
    shuffle: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> "PlantedGraphSpec":
        regions = [PlantedRegion(**r) if isinstance(r, dict) else PlantedRegion(int(r))
                   for r in d.get("planted", [])]
        known = {"background_vertices", "seed", "background_parents", "exit_children",
                 "extra_edges", "shuffle"}
        unknown = set(d) - known - {"planted", "kind"}
        if unknown:
            raise UsageError(f"unknown spec fields: {sorted(unknown)}")
        kw = {k: d[k] for k in known if k in d}
        if "extra_edges" in kw:
            kw["extra_edges"] = [tuple(e) for e in kw["extra_edges"]]
        return cls(planted=regions, **kw)


def _random_region(size, density, rng):
    if size == 2:
        return [(0, 1), (0, 1)]
    last = size - 1
    for _ in range(1000):
        edges = set()
        for i in range(1, last):
            edges.add((rng.randrange(0, i), i))
            edges.add((i, rng.randrange(i + 1, size)))
        for i in range(last):
            for j in range(i + 1, size):
                if rng.random() < density / size * 4:
                    edges.add((i, j))
        edges = sorted(edges)
        g = DirectedMultigraph.from_edges(size, edges)
        if is_superbubble(g, 0, last).ok:
            return edges
    raise UsageError(f"could not draw a region of size {size}")


def _check_region(region, idx):
    if region.size < 2:
        raise UsageError(f"region {idx}: size must be >= 2")
    last = region.size - 1
    for a, b in region.edges:
        if not (0 <= a < region.size and 0 <= b < region.size):
            raise UsageError(f"region {idx}: edge ({a}, {b}) outside 0..{last}")
        if b == 0:
            raise UsageError(f"region {idx}: edge into the entrance would break matching")
        if a == last:
            raise UsageError(f"region {idx}: edge out of the exit would break matching")


def generate_planted_graph(spec: PlantedGraphSpec):
    """Return ``(graph, truth)`` where ``truth`` lists every superbubble.

    Ground truth comes from the brute-force oracle run on each region in
    isolation; the attachment rules make that equal to the truth in the
    assembled graph.
    """
    B = spec.background_vertices
    if B < 0:
        raise UsageError("background_vertices must be >= 0")
    if spec.background_parents < 2:
        raise UsageError("background_parents must be >= 2")
    if 0 < B <= spec.background_parents:
        raise UsageError(f"background needs more than {spec.background_parents} vertices")
    rng = random.Random(spec.seed)
    nrng = np.random.default_rng(spec.seed)

    regions = []
    for idx, reg in enumerate(spec.planted):
        if reg.edges is None:
            reg = PlantedRegion(reg.size, _random_region(reg.size, reg.density, rng), reg.density)
        else:
            reg = PlantedRegion(reg.size, [tuple(e) for e in reg.edges], reg.density)
        _check_region(reg, idx)
        regions.append(reg)

    offsets, n = [], B
    for reg in regions:
        offsets.append(n)
        n += reg.size
    role = {}    # layout id -> (region, local id)
    for idx, (reg, off) in enumerate(zip(regions, offsets)):
        for j in range(reg.size):
            role[off + j] = (idx, j)

    for a, b in spec.extra_edges:
        if not (0 <= a < n and 0 <= b < n):
            raise UsageError(f"extra edge ({a}, {b}) outside 0..{n - 1}")
        if a in role and b in role:
            raise UsageError(f"extra edge ({a}, {b}) joins two planted vertices")
        if b in role and role[b][1] != 0:
            raise UsageError(f"extra edge ({a}, {b}) enters a planted interior/exit vertex")
        if a in role and role[a][1] != regions[role[a][0]].size - 1:
            raise UsageError(f"extra edge ({a}, {b}) leaves a planted entrance/interior vertex")
    if B == 0 and spec.extra_edges:
        raise UsageError("extra edges need a background")

    src_parts, dst_parts = [], []
    if B:
        k = spec.background_parents
        tgt = np.repeat(np.arange(B, dtype=np.int64), k)
        # k distinct offsets in 1..B-1 per vertex -> distinct parents, none itself
        offs = np.stack([nrng.choice(np.arange(1, B), size=k, replace=False)
                         for _ in range(B)]) if B <= 64 else _distinct_offsets(nrng, B, k)
        src_parts.append((tgt + offs.reshape(-1)) % B)
        dst_parts.append(tgt)
    for reg, off in zip(regions, offsets):
        e = np.array(reg.edges, dtype=np.int64).reshape(-1, 2) + off
        src_parts.append(e[:, 0])
        dst_parts.append(e[:, 1])
    if B:
        for reg, off in zip(regions, offsets):
            parents = nrng.choice(B, size=spec.background_parents, replace=False)
            src_parts.append(parents.astype(np.int64))
            dst_parts.append(np.full(spec.background_parents, off, dtype=np.int64))
            kids = nrng.choice(B, size=min(spec.exit_children, B), replace=False)
            src_parts.append(np.full(kids.size, off + reg.size - 1, dtype=np.int64))
            dst_parts.append(kids.astype(np.int64))
    if spec.extra_edges:
        extra = np.array(spec.extra_edges, dtype=np.int64).reshape(-1, 2)
        src_parts.append(extra[:, 0])
        dst_parts.append(extra[:, 1])
    src = np.concatenate(src_parts) if src_parts else np.empty(0, np.int64)
    dst = np.concatenate(dst_parts) if dst_parts else np.empty(0, np.int64)

    perm = nrng.permutation(n) if spec.shuffle else np.arange(n)
    g = DirectedMultigraph(n, perm[src], perm[dst])

    truth = []
    for reg, off in zip(regions, offsets):
        local = DirectedMultigraph.from_edges(reg.size, reg.edges)
        for sb in enumerate_brute_force(local, max_vertices=max(reg.size, 16)):
            truth.append(Superbubble(int(perm[sb.entrance + off]), int(perm[sb.exit + off]),
                                     frozenset(int(perm[v + off]) for v in sb.interior)))
    truth.sort(key=Superbubble.key)
    return g, truth


def _distinct_offsets(rng, B, k):
    # rejection sampling is cheap when k << B
    offs = rng.integers(1, B, size=(B, k))
    while True:
        s = np.sort(offs, axis=1)
        dup = (np.diff(s, axis=1) == 0).any(axis=1)
        if not dup.any():
            return offs
        offs[dup] = rng.integers(1, B, size=(int(dup.sum()), k))
