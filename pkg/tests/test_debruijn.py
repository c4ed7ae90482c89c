import gzip
import io
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sbk.debruijn import (build_debruijn, count_kmers, debruijn_from_reads, read_sequences,
                          reverse_complement, solid_kmers)
from sbk.errors import InputFormatError, UsageError


@pytest.mark.parametrize("reads, k, expected", [
    (["ACGT"], 3, {"ACG": 1, "CGT": 1}),
    (["AAAA"], 3, {"AAA": 2}),
    (["ACNGT"], 3, {}),
    (["acgt", "CG"], 2, {"AC": 1, "CG": 2, "GT": 1}),
])
def test_count_kmers(reads, k, expected):
    assert count_kmers(reads, k).counts == expected


def test_count_kmers_rejects_small_k():
    with pytest.raises(UsageError):
        count_kmers(["ACGT"], 1)


def test_reads_do_not_join_across_boundaries():
    assert count_kmers(["AC", "GT"], 3).counts == {}


def test_long_k_uses_string_path():
    read = "ACGT" * 12
    table = count_kmers([read], 40)
    # period-4 read: 9 windows collapse onto 4 distinct 40-mers
    assert table.counts == {read[i:i + 40]: (3 if i == 0 else 2) for i in range(4)}


def _naive(reads, k, canonical=False):
    out = {}
    for r in reads:
        r = r.upper()
        for i in range(len(r) - k + 1):
            w = r[i:i + k]
            if set(w) <= set("ACGT"):
                if canonical:
                    w = min(w, reverse_complement(w))
                out[w] = out.get(w, 0) + 1
    return out


reads_st = st.lists(st.text("ACGTN", max_size=30), max_size=8)


@given(reads_st, st.integers(2, 36), st.booleans(), st.integers(1, 3))
def test_counts_match_naive_scan(reads, k, canonical, threads):
    table = count_kmers(reads, k, canonical=canonical, threads=threads)
    assert table.counts == _naive(reads, k, canonical)
    # conservation: every valid window counted once
    assert table.total() == sum(_naive(reads, k, canonical).values())


def test_solid_kmers():
    from sbk.debruijn import KmerCountTable
    t = KmerCountTable(3, {"AAA": 2, "ACG": 1})
    assert solid_kmers(t, 2) == {"AAA"}
    assert solid_kmers(t, 1) == {"AAA", "ACG"}
    assert solid_kmers(t, 10**9) == set()
    with pytest.raises(UsageError):
        solid_kmers(t, 0)


def test_build_single_kmer():
    dbg = build_debruijn({"ACG"}, 3)
    assert dbg.node_names == ["AC", "CG"]
    assert [(e.source, e.target, e.label) for e in dbg.graph.edges()] == [(0, 1, "G")]


def test_build_homopolymer_self_loop():
    dbg = build_debruijn({"AAA"}, 3)
    assert dbg.node_names == ["AA"]
    assert dbg.graph.has_edge(0, 0)
    assert dbg.graph.label(0) == "A"


def test_build_path():
    dbg = build_debruijn({"ACG", "CGT"}, 3)
    g = dbg.graph
    ac, cg, gt = (dbg.vertex(x) for x in ("AC", "CG", "GT"))
    assert g.edge_count == 2
    assert g.children(ac) == [cg] and g.children(cg) == [gt]


def test_build_rejects_mixed_lengths():
    with pytest.raises(UsageError):
        build_debruijn({"ACG", "AC"}, 3)


@given(st.sets(st.text("ACGT", min_size=4, max_size=4), max_size=40))
def test_debruijn_overlap_invariant(solid):
    dbg = build_debruijn(solid, 4)
    g = dbg.graph
    assert g.edge_count == len(solid)
    pairs = set()
    for e in g.edges():
        u, v = dbg.name(e.source), dbg.name(e.target)
        assert len(e.label) == 1 and e.label in "ACGT"
        assert u[1:] + e.label == v
        pairs.add((e.source, e.target))
    assert len(pairs) == g.edge_count   # no parallel edges
    names = set(dbg.node_names)
    assert names == {x[:-1] for x in solid} | {x[1:] for x in solid}


def test_canonical_mode_folds_strands():
    table = count_kmers(["ACGTT", "AACGT"], 3, canonical=True)
    # AAC/GTT and ACG/CGT are reverse-complement pairs
    assert table.counts == {"AAC": 2, "ACG": 4}


def test_pipeline_helper_defaults():
    reads = ["ACGTACGTTTGCA"] * 3
    dbg = debruijn_from_reads(reads, k=5, d=3)
    assert dbg.graph.edge_count == len({reads[0][i:i + 5] for i in range(9)})


# -- FASTA/FASTQ ---------------------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    (">r1\nacgt\n", ["ACGT"]),
    ("@r1\nACGT\n+\nIIII\n", ["ACGT"]),
    (">r1\nAC\nGT\n", ["ACGT"]),
    ("", []),
    ("\n\n", []),
    (">a\nAC\n>b\n>c\nGGN\n", ["AC", "", "GGN"]),
    ("@a\nAC\n+a\n!!\n@b\nT\n+\n#\n", ["AC", "T"]),
])
def test_read_sequences(text, expected):
    assert read_sequences(io.StringIO(text)) == expected


@pytest.mark.parametrize("text, line", [
    ("ACGT\n", 1),
    ("@r1\nACGT\n-\nIIII\n", 3),
    ("@r1\nACGT\n+\nIII\n", 4),
    ("@r1\nACGT\n+\n", 1),
    (">r1\nAC1T\n", 2),
])
def test_malformed_reads_report_line(text, line):
    with pytest.raises(InputFormatError) as info:
        read_sequences(io.StringIO(text))
    assert info.value.line == line


def test_gzip_input(tmp_path):
    p = tmp_path / "r.fq.gz"
    with gzip.open(p, "wt") as fh:
        fh.write("@x\nacgtn\n+\nIIIII\n")
    assert read_sequences(p) == ["ACGTN"]


def test_thread_count_does_not_change_counts():
    rng = random.Random(5)
    reads = ["".join(rng.choice("ACGT") for _ in range(60)) for _ in range(200)]
    base = count_kmers(reads, 11).counts
    assert count_kmers(reads, 11, threads=4).counts == base
    assert list(count_kmers(reads, 11, threads=3).counts) == list(base)
