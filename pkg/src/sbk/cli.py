"""Command-line front end: ``sbk <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 input format error (including
unreadable files), 3 internal invariant violation.  Defaults for the shared
options can be overridden with ``SBK_K``, ``SBK_D``, ``SBK_MIN_SIZE``,
``SBK_THREADS``, ``SBK_SEED`` and ``SBK_CANONICAL``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .debruijn import DEFAULT_D, DEFAULT_K, build_debruijn, count_kmers, read_sequences, solid_kmers
from .errors import InputFormatError, InvariantError, UsageError
from .graph import load_graph, read_names, save_graph, write_names
from .oracle import DEFAULT_MAX_VERTICES, enumerate_brute_force, is_superbubble
from .randgen import (DEFAULT_MAX_NODES, BranchingModel, PlantedGraphSpec, generate_planted_graph,
                      gw_summary, random_small_graph, random_unipath_like, simulate_gw_sizes)
from .stats import build_report
from .superbubble import (DetectionState, Superbubble, enumerate_superbubbles, filter_by_size,
                          visited_count)
from .unipath import compact

logger = logging.getLogger("sbk")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3


def _env(name, default, cast=int):
    raw = os.environ.get("SBK_" + name)
    if raw is None:
        return default
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError:
        raise UsageError(f"SBK_{name}={raw!r} is not a valid {cast.__name__}") from None


@dataclass
class PipelineConfig:
    reads: Path
    out_dir: Path
    k: int = DEFAULT_K
    d: int = DEFAULT_D
    canonical: bool = False
    min_size: int = 2
    threads: int = 1
    seed: int = 0
    threshold: float = 1.05
    ratio_min_size: int = 5

    def __post_init__(self):
        if self.k < 2:
            raise UsageError(f"k must be >= 2, got {self.k}")
        if self.d < 1:
            raise UsageError(f"d must be >= 1, got {self.d}")
        if self.min_size < 2:
            raise UsageError(f"min-size must be >= 2, got {self.min_size}")
        if self.threads < 1:
            raise UsageError(f"threads must be >= 1, got {self.threads}")


# -- superbubble report formats ---------------------------------------------------

def format_tsv(bubbles, visited_total=None) -> str:
    lines = ["# entrance\texit\tsize\tinterior"]
    if visited_total is not None:
        lines.append(f"# visited_total\t{visited_total}")
    for b in bubbles:
        interior = ",".join(str(v) for v in sorted(b.interior))
        lines.append(f"{b.entrance}\t{b.exit}\t{b.size}\t{interior}")
    return "\n".join(lines) + "\n"


def format_json(bubbles, meta: dict) -> str:
    doc = dict(meta)
    doc["superbubbles"] = [{"entrance": b.entrance, "exit": b.exit, "size": b.size,
                            "interior": sorted(b.interior)} for b in bubbles]
    return json.dumps(doc, indent=2) + "\n"


def read_bubbles(path):
    """Load a TSV or JSON superbubble report; returns ``(bubbles, meta)``."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            bubbles = [Superbubble(int(r["entrance"]), int(r["exit"]),
                                   frozenset(int(v) for v in r["interior"]))
                       for r in doc["superbubbles"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise InputFormatError(f"bad JSON report: {exc}", None, str(path)) from None
        meta = {k: v for k, v in doc.items() if k != "superbubbles"}
        return bubbles, meta
    bubbles, meta = [], {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            parts = line[1:].strip().split("\t")
            if len(parts) == 2 and parts[0] == "visited_total":
                meta["visited_total"] = int(parts[1])
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise InputFormatError("expected entrance, exit, size, interior", lineno, str(path))
        try:
            s, t, size = int(fields[0]), int(fields[1]), int(fields[2])
            interior = frozenset(int(v) for v in fields[3].split(",") if v) if len(fields) == 4 else frozenset()
            b = Superbubble(s, t, interior)
        except (ValueError, UsageError) as exc:
            raise InputFormatError(str(exc), lineno, str(path)) from None
        if b.size != size:
            raise InputFormatError(f"size column {size} disagrees with interior", lineno, str(path))
        bubbles.append(b)
    return bubbles, meta


def _names_path(path) -> Path:
    return Path(str(path) + ".names")


def _write_graph_with_names(g, names, out):
    save_graph(g, out)
    if names is not None:
        write_names(names, _names_path(out))


def _load_names(path, n):
    p = _names_path(path)
    if not p.exists():
        return None
    names = read_names(p)
    if len(names) != n:
        raise InputFormatError(f"{p} has {len(names)} names for {n} vertices")
    return names


def _emit(text, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- stages ------------------------------------------------------------------------

def stage_build_graph(reads_path, k, d, canonical=False, threads=1):
    t0 = time.perf_counter()
    reads = read_sequences(reads_path)
    table = count_kmers(reads, k, canonical=canonical, threads=threads)
    dbg = build_debruijn(solid_kmers(table, d), k)
    logger.info("stage=build-graph reads=%d kmers=%d vertices=%d edges=%d seconds=%.3f",
                len(reads), len(table), dbg.graph.vertex_count, dbg.graph.edge_count,
                time.perf_counter() - t0)
    return dbg


def stage_compact(g, names):
    t0 = time.perf_counter()
    ug = compact(g, names)
    logger.info("stage=compact vertices=%d edges=%d seconds=%.3f",
                ug.graph.vertex_count, ug.graph.edge_count, time.perf_counter() - t0)
    return ug


def stage_find(g, threads=1, backend="numba"):
    state = DetectionState(g.vertex_count)
    t0 = time.perf_counter()
    bubbles = enumerate_superbubbles(g, state, threads=threads, backend=backend)
    wall = time.perf_counter() - t0
    logger.info("stage=find-superbubbles superbubbles=%d visited=%d seconds=%.3f",
                len(bubbles), visited_count(state), wall)
    return bubbles, state, wall


def run_pipeline(config: PipelineConfig) -> dict:
    """Reads -> de Bruijn graph -> unipath graph -> superbubbles -> report.

    Artifacts in ``config.out_dir``: ``debruijn.tsv``, ``unipath.tsv`` (each
    with a ``.names`` side table), ``superbubbles.tsv`` and ``report.json``.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dbg = stage_build_graph(config.reads, config.k, config.d, config.canonical, config.threads)
    _write_graph_with_names(dbg.graph, dbg.node_names, out / "debruijn.tsv")
    ug = stage_compact(dbg.graph, dbg.node_names)
    _write_graph_with_names(ug.graph, ug.names, out / "unipath.tsv")
    bubbles, state, wall = stage_find(ug.graph, config.threads)
    bubbles = filter_by_size(bubbles, config.min_size)
    (out / "superbubbles.tsv").write_text(format_tsv(bubbles, visited_count(state)))
    report = build_report(ug.graph, bubbles, visited_count(state), wall,
                          config.threshold, config.ratio_min_size)
    doc = report.to_dict()
    (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n")
    return doc


# -- argument parsing ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p, top=False):
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    # subparsers must not reset a -v given before the subcommand
    p.add_argument("-v", "--verbose", action="count", default=0 if top else argparse.SUPPRESS,
                   help="log progress to stderr")


def _threads(p):
    p.add_argument("--threads", type=int, default=_env("THREADS", 1))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbk", description=__doc__.splitlines()[0])
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-graph", help="reads -> de Bruijn graph edge list")
    _common(p)
    p.add_argument("--reads", required=True)
    p.add_argument("-k", type=int, default=_env("K", DEFAULT_K))
    p.add_argument("-d", type=int, default=_env("D", DEFAULT_D))
    p.add_argument("--canonical", action="store_true", default=_env("CANONICAL", False, bool))
    p.add_argument("--out", required=True)
    _threads(p)

    p = sub.add_parser("compact", help="de Bruijn edge list -> unipath edge list")
    _common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("find-superbubbles", help="enumerate superbubbles")
    _common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--min-size", type=int, default=_env("MIN_SIZE", 2))
    p.add_argument("--report", choices=("tsv", "json"), default="tsv")
    p.add_argument("--stats", action="store_true", help="print a summary to stderr")
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.add_argument("--backend", choices=("numba", "python"), default="numba")
    _threads(p)

    p = sub.add_parser("oracle-check", help="brute-force condition breakdown")
    _common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--pair", nargs=2, type=int, metavar=("S", "T"))
    p.add_argument("--max-vertices", type=int, default=DEFAULT_MAX_VERTICES)

    p = sub.add_parser("oracle-enum", help="brute-force enumeration (small graphs)")
    _common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--min-size", type=int, default=_env("MIN_SIZE", 2))
    p.add_argument("--max-vertices", type=int, default=DEFAULT_MAX_VERTICES)

    p = sub.add_parser("gen-random", help="generate a random test graph")
    _common(p)
    p.add_argument("--spec", required=True, help="JSON spec file")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None, help="write planted ground truth (TSV)")

    p = sub.add_parser("gw-sim", help="Monte-Carlo Galton-Watson tree sizes")
    _common(p)
    p.add_argument("-p", type=float, required=True)
    p.add_argument("--dist", required=True, help='child distribution "i:p_i,..."')
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=_env("SEED", 0))
    p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    _threads(p)

    p = sub.add_parser("stats", help="size histogram and path-length ratios")
    _common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--bubbles", required=True, help="TSV or JSON superbubble report")
    p.add_argument("--threshold", type=float, default=1.05)
    p.add_argument("--min-size", type=int, default=5)
    p.add_argument("--out", required=True)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    _common(p)
    p.add_argument("--reads", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("-k", type=int, default=_env("K", DEFAULT_K))
    p.add_argument("-d", type=int, default=_env("D", DEFAULT_D))
    p.add_argument("--canonical", action="store_true", default=_env("CANONICAL", False, bool))
    p.add_argument("--min-size", type=int, default=_env("MIN_SIZE", 2))
    p.add_argument("--seed", type=int, default=_env("SEED", 0))
    p.add_argument("--threshold", type=float, default=1.05)
    p.add_argument("--ratio-min-size", type=int, default=5)
    _threads(p)
    return parser


# -- commands -----------------------------------------------------------------------------

def _cmd_build_graph(a):
    if a.threads < 1:
        raise UsageError("--threads must be >= 1")
    dbg = stage_build_graph(a.reads, a.k, a.d, a.canonical, a.threads)
    _write_graph_with_names(dbg.graph, dbg.node_names, a.out)


def _cmd_compact(a):
    g = load_graph(a.inp)
    ug = stage_compact(g, _load_names(a.inp, g.vertex_count))
    _write_graph_with_names(ug.graph, ug.names, a.out)


def _cmd_find(a):
    if a.min_size < 2:
        raise UsageError("--min-size must be >= 2")
    if a.threads < 1:
        raise UsageError("--threads must be >= 1")
    g = load_graph(a.inp)
    bubbles, state, wall = stage_find(g, a.threads, a.backend)
    bubbles = filter_by_size(bubbles, a.min_size)
    visited = visited_count(state)
    if a.report == "tsv":
        _emit(format_tsv(bubbles, visited), a.out)
    else:
        meta = {"vertices": g.vertex_count, "edges": g.edge_count, "min_size": a.min_size,
                "visited_total": visited, "wall_time_seconds": wall}
        _emit(format_json(bubbles, meta), a.out)
    if a.stats:
        report = build_report(g, bubbles, visited, wall)
        summary = report.to_dict()
        summary.pop("ratio_table")
        summary["aborts"] = {r.value: c for r, c in sorted(state.abort_counts.items(),
                                                           key=lambda kv: kv[0].value)}
        sys.stderr.write(json.dumps(summary, indent=2) + "\n")


def _cmd_oracle_check(a):
    g = load_graph(a.inp)
    if a.pair:
        s, t = a.pair
        g._vertex(s), g._vertex(t)
        print(json.dumps(is_superbubble(g, s, t).as_dict(), indent=2))
        return EXIT_OK
    fast = enumerate_superbubbles(g)
    slow = enumerate_brute_force(g, a.max_vertices)
    same = [b.key() for b in fast] == [b.key() for b in slow]
    print(json.dumps({"agree": same, "detected": len(fast), "oracle": len(slow)}))
    if not same:
        logger.error("detection and oracle disagree")
        return EXIT_INVARIANT
    return EXIT_OK


def _cmd_oracle_enum(a):
    if a.min_size < 2:
        raise UsageError("--min-size must be >= 2")
    g = load_graph(a.inp)
    sys.stdout.write(format_tsv(filter_by_size(enumerate_brute_force(g, a.max_vertices),
                                               a.min_size)))


def _cmd_gen_random(a):
    try:
        spec = json.loads(Path(a.spec).read_text())
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"bad JSON: {exc}", exc.lineno, a.spec) from None
    if not isinstance(spec, dict):
        raise InputFormatError("spec must be a JSON object", None, a.spec)
    kind = spec.get("kind", "planted")
    truth = None
    if kind == "planted":
        g, truth = generate_planted_graph(PlantedGraphSpec.from_dict(spec))
    elif kind == "unipath_like":
        dist = spec.get("out_dist")
        if dist is not None:
            dist = {int(i): float(q) for i, q in dist.items()}
        g = random_unipath_like(int(spec["n"]), int(spec.get("seed", 0)), dist,
                                int(spec.get("window", 64)))
    elif kind == "small":
        g = random_small_graph(int(spec.get("seed", 0)))
    else:
        raise UsageError(f"unknown spec kind {kind!r}")
    save_graph(g, a.out)
    if a.truth is not None:
        if truth is None:
            raise UsageError("--truth only applies to planted specs")
        Path(a.truth).write_text(format_tsv(truth))


def _cmd_gw_sim(a):
    model = BranchingModel.parse(a.p, a.dist)
    sizes = simulate_gw_sizes(model, a.trials, a.seed, a.max_nodes, a.threads)
    s = gw_summary(model, sizes)
    for key in ("r", "trials", "mean", "variance", "stderr", "truncated", "expected"):
        print(f"{key}\t{s[key]}")


def _cmd_stats(a):
    g = load_graph(a.inp)
    bubbles, meta = read_bubbles(a.bubbles)
    for b in bubbles:
        for v in b.vertices:
            if not 0 <= v < g.vertex_count:
                raise InputFormatError(f"superbubble vertex {v} not in graph", None, a.bubbles)
    report = build_report(g, bubbles, meta.get("visited_total"), meta.get("wall_time_seconds"),
                          a.threshold, a.min_size)
    Path(a.out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")


def _cmd_pipeline(a):
    cfg = PipelineConfig(Path(a.reads), Path(a.out_dir), a.k, a.d, a.canonical, a.min_size,
                         a.threads, a.seed, a.threshold, a.ratio_min_size)
    doc = run_pipeline(cfg)
    logger.info("stage=pipeline superbubbles=%d visited=%s", doc["superbubbles"],
                doc["visited_total"])


_COMMANDS = {
    "build-graph": _cmd_build_graph,
    "compact": _cmd_compact,
    "find-superbubbles": _cmd_find,
    "oracle-check": _cmd_oracle_check,
    "oracle-enum": _cmd_oracle_enum,
    "gen-random": _cmd_gen_random,
    "gw-sim": _cmd_gw_sim,
    "stats": _cmd_stats,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    try:
        parser = build_parser()
    except UsageError as exc:
        sys.stderr.write(f"sbk: error: {exc}\n")
        return EXIT_USAGE
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(asctime)s %(levelname)s %(name)s %(message)s",
                        stream=sys.stderr)
    try:
        return _COMMANDS[args.command](args) or EXIT_OK
    except UsageError as exc:
        sys.stderr.write(f"sbk {args.command}: usage error: {exc}\n")
        return EXIT_USAGE
    except InputFormatError as exc:
        sys.stderr.write(f"sbk {args.command}: input error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(f"sbk {args.command}: cannot access {exc.filename or ''}: "
                         f"{exc.strerror or exc}\n")
        return EXIT_INPUT
    except InvariantError as exc:
        sys.stderr.write(f"sbk {args.command}: internal error: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
