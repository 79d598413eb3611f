from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dexnet import metrics
from dexnet.model import LiquidityGraph
from conftest import bfs_components, gini_double_sum, path_betweenness, peel_core_numbers, random_graph


def star(k):
    return LiquidityGraph.from_edges([("hub", f"leaf{i}") for i in range(k)])


# -- degrees and components ------------------------------------------------------

def test_degree_distribution_star():
    g = star(5)
    assert metrics.degree_distribution(g) == {1: 5, 5: 1}
    assert metrics.average_degree(g) == pytest.approx(10 / 6)


def test_average_degree_empty():
    with pytest.raises(ValueError):
        metrics.average_degree(LiquidityGraph({}, {}))


def test_components_against_bfs():
    rng = np.random.default_rng(1)
    for _ in range(50):
        g = random_graph(rng, 40, p=rng.uniform(0.01, 0.1))
        c = metrics.components(g)
        assert sorted(c.sizes, reverse=True) == bfs_components(g)
        assert c.count == len(c.sizes)


# -- betweenness -------------------------------------------------------------------

def test_star_betweenness():
    nodes, edges = metrics.betweenness(star(4))
    assert nodes.scores["hub"] == pytest.approx(1.0)
    assert nodes.scores["leaf0"] == 0.0
    # each spoke carries the pair (hub, leaf) plus 3 leaf-leaf pairs, out of 10 pairs
    assert edges.scores[("hub", "leaf0")] == pytest.approx(4 / 10)


def test_path_graph_raw():
    g = LiquidityGraph.from_edges([("a", "b"), ("b", "c"), ("c", "d")])
    nodes = metrics.node_betweenness(g, normalized=False).scores
    assert nodes == {"a": 0.0, "b": 2.0, "c": 2.0, "d": 0.0}
    edges = metrics.edge_betweenness(g, normalized=False).scores
    assert edges == {("a", "b"): 3.0, ("b", "c"): 4.0, ("c", "d"): 3.0}


def test_small_graph_normalisation():
    g = LiquidityGraph.from_edges([("a", "b")])
    assert metrics.node_betweenness(g).scores == {"a": 0.0, "b": 0.0}
    assert metrics.edge_betweenness(g).scores == {("a", "b"): 1.0}


def test_betweenness_matches_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(30):
        g = random_graph(rng, 25)
        want_nodes, want_edges = path_betweenness(g)
        nodes, edges = metrics.betweenness(g, normalized=False)
        for v, s in want_nodes.items():
            assert abs(nodes.scores[v] - s) < 1e-9
        for e, s in want_edges.items():
            assert abs(edges.scores[e] - s) < 1e-9


def test_betweenness_parallel_bit_identical():
    rng = np.random.default_rng(3)
    g = metrics.random_reference(300, 500, rng)
    serial = metrics.betweenness(g, parallelism=1)
    parallel = metrics.betweenness(g, parallelism=3)
    assert serial[0].scores == parallel[0].scores
    assert serial[1].scores == parallel[1].scores


def test_top_k_ranking_ties_by_id():
    nodes = metrics.node_betweenness(star(3), top_k=2)
    assert nodes.top_k == [("hub", 1.0), ("leaf0", 0.0)]


# -- k-core ---------------------------------------------------------------------------

def test_core_numbers_clique_plus_tail():
    edges = [(a, b) for a in "abcd" for b in "abcd" if a < b] + [("d", "e"), ("e", "f")]
    g = LiquidityGraph.from_edges(edges)
    assert metrics.core_numbers(g) == {"a": 3, "b": 3, "c": 3, "d": 3, "e": 1, "f": 1}
    dec = metrics.core_decomposition(g)
    assert dec.max_k == 3
    assert dec.k_group_sizes == {0: 6, 1: 6, 2: 4, 3: 4}
    k, core = metrics.max_core_subgraph(g, dec)
    assert k == 3 and set(core.nodes) == set("abcd")
    assert metrics.average_degree(core) == 3.0


def test_core_numbers_match_peeling():
    rng = np.random.default_rng(11)
    for _ in range(40):
        g = random_graph(rng, 60)
        assert metrics.core_numbers(g) == peel_core_numbers(g)


def test_isolated_nodes_have_core_zero():
    g = LiquidityGraph.from_edges([("a", "b")], nodes=["z"])
    assert metrics.core_numbers(g)["z"] == 0


def test_core_decomposition_empty():
    dec = metrics.core_decomposition(LiquidityGraph({}, {}))
    assert dec.max_k == 0 and dec.k_group_sizes == {}
    with pytest.raises(ValueError):
        metrics.max_core_subgraph(LiquidityGraph({}, {}))


# -- gini ----------------------------------------------------------------------------

def test_gini_hand_cases():
    assert metrics.gini([0, 0, 0, 1]) == 0.75
    assert metrics.gini([5, 5, 5]) == pytest.approx(0.0, abs=1e-15)
    assert metrics.gini([Decimal("1.5"), Decimal("0")]) == pytest.approx(0.5)


@pytest.mark.parametrize("bad", [[], [0, 0], [-1, 2], [1, float("nan")]])
def test_gini_rejects(bad):
    with pytest.raises(ValueError):
        metrics.gini(bad)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=300).filter(lambda x: sum(x) > 0))
def test_gini_matches_double_sum(x):
    assert abs(metrics.gini(x) - gini_double_sum(x)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 1e4), min_size=1, max_size=100), st.floats(0.001, 1000))
def test_gini_scale_invariant(x, c):
    assert metrics.gini([c * v for v in x]) == pytest.approx(metrics.gini(x), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=100).filter(lambda x: sum(x) > 0))
def test_gini_bounds(x):
    g = metrics.gini(x)
    assert -1e-12 <= g < 1


# -- random reference ------------------------------------------------------------------

@pytest.mark.parametrize("n,m", [(10, 0), (10, 20), (10, 44), (10, 45), (200, 300)])
def test_random_reference_size(n, m):
    g = metrics.random_reference(n, m, 0)
    assert g.number_of_nodes() == n and g.number_of_edges() == m


def test_random_reference_seeded():
    assert metrics.random_reference(100, 150, 5) == metrics.random_reference(100, 150, 5)
    assert metrics.random_reference(100, 150, 5) != metrics.random_reference(100, 150, 6)


def test_random_reference_too_many_edges():
    with pytest.raises(ValueError):
        metrics.random_reference(4, 7, 0)


def test_core_periphery_comparison_keys():
    g = star(20)
    cmp = metrics.core_periphery_comparison(g, 0)
    assert cmp["nodes"] == (21, 21)
    assert cmp["average_degree"][0] == cmp["average_degree"][1]
    assert cmp["max_k"][0] == 1


def test_edge_id():
    assert metrics.edge_id("b", "a") == "a-b"
