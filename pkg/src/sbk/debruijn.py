"""Reads -> k-mer counts -> solid k-mers -> de Bruijn graph.

k-mers up to 32 bases are packed two bits per base into uint64 and counted
with ``np.unique``; longer k falls back to a string ``Counter``.  Windows
that touch any non-ACGT character are skipped.
"""

from __future__ import annotations

import gzip
import io
import logging
import os
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InputFormatError, UsageError
from .graph import DirectedMultigraph

logger = logging.getLogger(__name__)

DEFAULT_K = 27
DEFAULT_D = 3

_ENCODE = np.full(256, 255, dtype=np.uint8)
for _i, _c in enumerate(b"ACGT"):
    _ENCODE[_c] = _i
_DECODE = np.frombuffer(b"ACGT", dtype=np.uint8)
_COMPLEMENT = str.maketrans("ACGT", "TGCA")
_NON_ACGT = re.compile(r"[^ACGT]")


def reverse_complement(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]


@dataclass
class KmerCountTable:
    k: int
    counts: dict[str, int] = field(default_factory=dict)
    canonical: bool = False

    def __len__(self):
        return len(self.counts)

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass
class DeBruijnGraph:
    graph: DirectedMultigraph
    node_names: list[str]
    k: int

    def __post_init__(self):
        self._ids = {name: i for i, name in enumerate(self.node_names)}

    def vertex(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise UsageError(f"no vertex named {name!r}") from None

    def name(self, v: int) -> str:
        return self.node_names[v]


# -- counting ------------------------------------------------------------------

def _count_packed(reads: Sequence[str], k: int, canonical: bool):
    if not reads:
        return np.empty(0, np.uint64), np.empty(0, np.int64)
    # "N" separators make every window that spans two reads invalid.
    joined = "N".join(reads).encode("ascii", "replace")
    codes = _ENCODE[np.frombuffer(joined, dtype=np.uint8)]
    L = codes.size - k + 1
    if L <= 0:
        return np.empty(0, np.uint64), np.empty(0, np.int64)
    bad = np.concatenate(([0], np.cumsum(codes == 255)))
    valid = (bad[k:] - bad[:-k]) == 0
    c64 = np.where(codes == 255, 0, codes).astype(np.uint64)
    fwd = np.zeros(L, dtype=np.uint64)
    two = np.uint64(2)
    for j in range(k):
        fwd = (fwd << two) | c64[j:j + L]
    if canonical:
        rev = np.zeros(L, dtype=np.uint64)
        three = np.uint64(3)
        for j in range(k - 1, -1, -1):
            rev = (rev << two) | (three - c64[j:j + L])
        fwd = np.minimum(fwd, rev)
    keys, counts = np.unique(fwd[valid], return_counts=True)
    return keys, counts.astype(np.int64)


def _decode_packed(keys: np.ndarray, k: int) -> list[str]:
    if keys.size == 0:
        return []
    shifts = (2 * np.arange(k - 1, -1, -1)).astype(np.uint64)
    digits = ((keys[:, None] >> shifts[None, :]) & np.uint64(3)).astype(np.uint8)
    raw = _DECODE[digits].tobytes()
    return [raw[i:i + k].decode("ascii") for i in range(0, len(raw), k)]


def _count_strings(reads: Sequence[str], k: int, canonical: bool) -> Counter:
    counter: Counter = Counter()
    for read in reads:
        for i in range(len(read) - k + 1):
            w = read[i:i + k]
            if _NON_ACGT.search(w):
                continue
            if canonical:
                w = min(w, reverse_complement(w))
            counter[w] += 1
    return counter


def count_kmers(reads: Iterable[str], k: int, canonical: bool = False,
                threads: int = 1) -> KmerCountTable:
    """Count every length-k window of every read.

    With ``canonical=True`` each k-mer is folded with its reverse complement
    (lexicographic minimum).  ``threads`` splits the reads into contiguous
    chunks; the merged table does not depend on it.
    """
    if k < 2:
        raise UsageError(f"k must be >= 2, got {k}")
    if threads < 1:
        raise UsageError(f"threads must be >= 1, got {threads}")
    reads = [r.decode("ascii") if isinstance(r, bytes) else r for r in reads]
    reads = [r.upper() for r in reads]
    chunks = [reads[i::threads] for i in range(threads)] if threads > 1 else [reads]

    if k <= 32:
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(lambda rs: _count_packed(rs, k, canonical), chunks))
            all_keys = np.concatenate([p[0] for p in parts])
            all_counts = np.concatenate([p[1] for p in parts])
            keys, inverse = np.unique(all_keys, return_inverse=True)
            counts = np.bincount(inverse, weights=all_counts, minlength=keys.size).astype(np.int64)
        else:
            keys, counts = _count_packed(reads, k, canonical)
        table = dict(zip(_decode_packed(keys, k), counts.tolist()))
    else:
        total: Counter = Counter()
        for part in chunks:
            total.update(_count_strings(part, k, canonical))
        table = dict(sorted(total.items()))
    logger.debug("counted %d distinct %d-mers from %d reads", len(table), k, len(reads))
    return KmerCountTable(k=k, counts=table, canonical=canonical)


def solid_kmers(table: KmerCountTable, d: int) -> set[str]:
    if d < 1:
        raise UsageError(f"d must be >= 1, got {d}")
    return {x for x, c in table.counts.items() if c >= d}


def build_debruijn(solid: Iterable[str], k: int) -> DeBruijnGraph:
    """One edge per solid k-mer ``T``: ``T[:-1] -> T[1:]`` labeled ``T[-1]``.

    Vertex ids follow the lexicographic order of the (k-1)-mer names and edges
    follow the order of the k-mers, so the result is independent of input order.
    """
    kmers = sorted(set(solid))
    for x in kmers:
        if len(x) != k:
            raise UsageError(f"k-mer {x!r} has length {len(x)}, expected {k}")
    names = sorted({x[:-1] for x in kmers} | {x[1:] for x in kmers})
    ids = {name: i for i, name in enumerate(names)}
    src = [ids[x[:-1]] for x in kmers]
    dst = [ids[x[1:]] for x in kmers]
    labels = [x[-1] for x in kmers]
    g = DirectedMultigraph(len(names), src, dst, labels)
    return DeBruijnGraph(graph=g, node_names=names, k=k)


def debruijn_from_reads(reads: Iterable[str], k: int = DEFAULT_K, d: int = DEFAULT_D,
                        canonical: bool = False, threads: int = 1) -> DeBruijnGraph:
    table = count_kmers(reads, k, canonical=canonical, threads=threads)
    return build_debruijn(solid_kmers(table, d), k)


# -- FASTA / FASTQ ------------------------------------------------------------

_SEQ_OK = re.compile(r"^[A-Za-z*\-.]*$")


def _text_stream(path_or_stream):
    if isinstance(path_or_stream, (str, os.PathLike)):
        with open(path_or_stream, "rb") as fh:
            head = fh.read(2)
        if head == b"\x1f\x8b":
            return io.TextIOWrapper(gzip.open(path_or_stream, "rb"), encoding="ascii"), True
        return open(path_or_stream, "r", encoding="ascii"), True
    return path_or_stream, False


def read_sequences(path_or_stream) -> list[str]:
    """Load every read from a FASTA or FASTQ file (gzip is detected).

    The format is chosen by the first non-blank character, ``>`` or ``@``.
    Sequences are uppercased, FASTA records may span lines, and FASTQ quality
    lines are read only to check their length.
    """
    fh, owned = _text_stream(path_or_stream)
    source = str(path_or_stream) if owned else None
    try:
        lines = [line.rstrip("\r\n") for line in fh]
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"non-ASCII input ({exc.reason})", None, source) from None
    finally:
        if owned:
            fh.close()

    first = next((i for i, line in enumerate(lines) if line.strip()), None)
    if first is None:
        return []
    marker = lines[first].lstrip()[0]
    if marker == ">":
        return _parse_fasta(lines, first, source)
    if marker == "@":
        return _parse_fastq(lines, first, source)
    raise InputFormatError(f"expected '>' or '@', found {marker!r}", first + 1, source)


def _check_seq(seq, lineno, source):
    if not _SEQ_OK.match(seq):
        raise InputFormatError("invalid character in sequence", lineno, source)
    return seq.upper()


def _parse_fasta(lines, start, source):
    reads, current = [], None
    for i in range(start, len(lines)):
        line = lines[i].strip()
        if not line:
            continue
        if line.startswith(">"):
            if current is not None:
                reads.append("".join(current))
            current = []
        elif current is None:
            raise InputFormatError("sequence before first header", i + 1, source)
        else:
            current.append(_check_seq(line, i + 1, source))
    if current is not None:
        reads.append("".join(current))
    return reads


def _parse_fastq(lines, start, source):
    reads = []
    i = start
    n = len(lines)
    while i < n:
        if not lines[i].strip():
            i += 1
            continue
        if not lines[i].startswith("@"):
            raise InputFormatError("FASTQ header must start with '@'", i + 1, source)
        if i + 3 >= n:
            raise InputFormatError("truncated FASTQ record", i + 1, source)
        seq = _check_seq(lines[i + 1].strip(), i + 2, source)
        if not lines[i + 2].startswith("+"):
            raise InputFormatError("FASTQ separator line must start with '+'", i + 3, source)
        if len(lines[i + 3].strip()) != len(seq):
            raise InputFormatError("quality length differs from sequence length", i + 4, source)
        reads.append(seq)
        i += 4
    return reads
