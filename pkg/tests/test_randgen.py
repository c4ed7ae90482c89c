import math

import numpy as np
import pytest

from sbk.errors import UsageError
from sbk.graph import DirectedMultigraph
from sbk.randgen import (BranchingModel, PlantedGraphSpec, PlantedRegion, estimate_model_from_graph,
                         expected_tree_size, generate_planted_graph, gw_summary, random_small_graph,
                         random_unipath_like, simulate_gw_sizes, simulate_gw_tree)
from sbk.superbubble import Superbubble, enumerate_superbubbles


def test_no_survivors_means_single_root():
    assert simulate_gw_tree(BranchingModel(0.0, {2: 1.0}), seed=1) == 1


def test_certain_chain_is_truncated():
    assert simulate_gw_tree(BranchingModel(1.0, {1: 1.0}), seed=1) is None


def test_max_nodes_truncation():
    sizes = simulate_gw_sizes(BranchingModel(1.0, {2: 1.0}), 3, seed=0, max_nodes=100)
    assert (sizes == -1).all()


@pytest.mark.parametrize("p,dist,expected", [
    (0.5, {1: 1.0}, 2.0),
    (0.77, {1: 1.0}, 1 / 0.23),
    (0.6, {1: 0.5, 2: 0.5}, 1 / 0.1),
    (1.0, {1: 1.0}, math.inf),
])
def test_expected_tree_size(p, dist, expected):
    assert expected_tree_size(BranchingModel(p, dist)) == pytest.approx(expected)


def test_r_077_closed_form():
    assert expected_tree_size(BranchingModel(0.77, {1: 1.0})) == pytest.approx(4.3478, abs=1e-4)


def test_simulation_matches_mean_small():
    model = BranchingModel(0.5, {1: 0.5, 2: 0.5})   # r = 0.75
    sizes = simulate_gw_sizes(model, 100_000, seed=3)
    s = gw_summary(model, sizes)
    assert s["truncated"] == 0
    assert abs(s["mean"] - 4.0) < 4 * s["stderr"]


def test_simulation_is_seeded_and_thread_independent():
    model = BranchingModel(0.4, {0: 0.2, 2: 0.8})
    a = simulate_gw_sizes(model, 200_000, seed=7, threads=1)
    b = simulate_gw_sizes(model, 200_000, seed=7, threads=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, simulate_gw_sizes(model, 200_000, seed=8))


@pytest.mark.parametrize("p,dist", [
    (1.5, {1: 1.0}), (-0.1, {1: 1.0}), (0.5, {1: 0.5}), (0.5, {-1: 1.0}), (0.5, {1: 1.5, 2: -0.5}),
])
def test_model_validation(p, dist):
    with pytest.raises(UsageError):
        BranchingModel(p, dist)


def test_parse_distribution():
    m = BranchingModel.parse(0.5, "0:0.25, 2:0.75")
    assert m.child_dist == {0: 0.25, 2: 0.75}
    assert m.r == pytest.approx(0.75)
    with pytest.raises(UsageError):
        BranchingModel.parse(0.5, "two:1")


def test_estimate_model(bubble):
    m = estimate_model_from_graph(bubble)
    assert m.p == 0.5 and m.r == pytest.approx(0.5)
    cycle = DirectedMultigraph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    assert estimate_model_from_graph(cycle).r == pytest.approx(1.0)
    assert estimate_model_from_graph(DirectedMultigraph(3)).r == 0.0
    with pytest.raises(UsageError):
        estimate_model_from_graph(DirectedMultigraph(0))


def test_random_small_graph_ranges():
    sizes = {random_small_graph(s).vertex_count for s in range(400)}
    assert min(sizes) >= 2 and max(sizes) <= 12
    assert random_small_graph(5).same_as(random_small_graph(5))


def test_random_unipath_like_is_seeded():
    g = random_unipath_like(5000, seed=2)
    assert g.same_as(random_unipath_like(5000, seed=2))
    assert g.out_degrees().max() <= 8
    assert estimate_model_from_graph(g).r < 1.0


def test_planted_simple_bubble():
    spec = PlantedGraphSpec(planted=[PlantedRegion(4, [(0, 1), (0, 2), (1, 3), (2, 3)])],
                            shuffle=False)
    g, truth = generate_planted_graph(spec)
    assert truth == [Superbubble(0, 3, frozenset({1, 2}))]
    assert enumerate_superbubbles(g) == truth


def test_planted_chain_reports_both_pieces():
    chain = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6)]
    spec = PlantedGraphSpec(background_vertices=50, planted=[PlantedRegion(7, chain)], seed=4)
    g, truth = generate_planted_graph(spec)
    assert len(truth) == 2
    assert enumerate_superbubbles(g) == truth


@pytest.mark.parametrize("extra", [[(50, 51)], [(0, 52)], [(51, 0)]])
def test_extra_edges_that_break_a_region_are_rejected(extra):
    # layout: background 0..49, region 50..53 (entrance 50, exit 53)
    spec = PlantedGraphSpec(background_vertices=50, planted=[PlantedRegion(4)], extra_edges=extra)
    with pytest.raises(UsageError):
        generate_planted_graph(spec)


def test_allowed_extra_edges_keep_truth():
    spec = PlantedGraphSpec(background_vertices=50, planted=[PlantedRegion(6)], seed=2,
                            extra_edges=[(3, 50), (55, 7), (10, 11)])
    g, truth = generate_planted_graph(spec)
    assert enumerate_superbubbles(g) == truth


def test_bad_region_edges():
    with pytest.raises(UsageError):
        generate_planted_graph(PlantedGraphSpec(planted=[PlantedRegion(3, [(0, 1), (1, 0)])]))
    with pytest.raises(UsageError):
        generate_planted_graph(PlantedGraphSpec(planted=[PlantedRegion(3, [(2, 1)])]))


def test_planted_is_deterministic():
    spec = PlantedGraphSpec(background_vertices=500, planted=[PlantedRegion(9), PlantedRegion(2)], seed=5)
    g1, t1 = generate_planted_graph(spec)
    g2, t2 = generate_planted_graph(spec)
    assert g1.same_as(g2) and t1 == t2


def test_spec_from_dict():
    spec = PlantedGraphSpec.from_dict({"kind": "planted", "background_vertices": 10,
                                       "planted": [3, {"size": 5}], "seed": 1})
    assert [r.size for r in spec.planted] == [3, 5]
    with pytest.raises(UsageError):
        PlantedGraphSpec.from_dict({"bogus": 1})
