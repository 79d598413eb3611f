from datetime import date
from decimal import Decimal

import pickle
import pytest

from dexnet.errors import DataIntegrityError, NotFoundError
from dexnet.model import (
    EdgeAttrs, LiquidityGraph, NodeAttrs, PairRecord, TokenRecord, build_graph, degree, end_of_day,
)

A, B, C, D = ("0x" + c * 40 for c in "abcd")


def pair(addr, t0, t1, ts=0):
    return PairRecord(addr, t0, t1, ts)


def test_build_graph_basic():
    pairs = [pair("p1", A, B), pair("p2", B, C), pair("p3", C, A)]
    g = build_graph(pairs, {"p1": Decimal("10")}, {A: Decimal("5")}, {A: TokenRecord(A, "AAA")})
    assert g.number_of_nodes() == 3
    assert g.number_of_edges() == 3
    assert degree(g, A) == 2
    assert g.edge(B, A).tvl_usd == Decimal("10")
    assert g.edge(B, C).tvl_usd == 0
    assert g.nodes[A] == NodeAttrs("AAA", Decimal("5"))


def test_pair_order_does_not_matter():
    pairs = [pair("p1", A, B), pair("p2", B, C), pair("p3", C, D)]
    assert build_graph(pairs) == build_graph(pairs[::-1])


def test_duplicate_unordered_pair_rejected():
    with pytest.raises(DataIntegrityError):
        build_graph([pair("p1", A, B), pair("p2", B, A)])


def test_self_loop_rejected():
    with pytest.raises(DataIntegrityError):
        build_graph([pair("p1", A, A)])


def test_as_of_includes_whole_day():
    day = date(2023, 10, 31)
    cut = end_of_day(day)
    g = build_graph([pair("p1", A, B, cut), pair("p2", B, C, cut + 1)], as_of=day)
    assert g.has_edge(A, B) and not g.has_edge(B, C)
    assert C not in g


def test_degree_of_missing_token():
    g = build_graph([pair("p1", A, B)])
    with pytest.raises(NotFoundError):
        degree(g, C)


def test_graph_validation():
    with pytest.raises(DataIntegrityError):
        LiquidityGraph({A: NodeAttrs()}, {(A, B): EdgeAttrs()})
    with pytest.raises(DataIntegrityError):
        LiquidityGraph({A: NodeAttrs(), B: NodeAttrs()}, {(A, B): EdgeAttrs(tvl_usd=Decimal(-1))})
    with pytest.raises(DataIntegrityError):
        LiquidityGraph.from_edges([(A, B), (B, A)])


def test_subgraph_and_without():
    g = LiquidityGraph.from_edges([(A, B), (B, C), (C, D)])
    h = g.without([B])
    assert set(h.nodes) == {A, C, D}
    assert list(h.edges) == [(C, D)]
    assert g.number_of_edges() == 3  # original untouched
    with pytest.raises(NotFoundError):
        g.subgraph(["zz"])


def test_pickle_roundtrip():
    g = build_graph([pair("p1", A, B), pair("p2", B, C)], {"p1": Decimal("1.5")}, as_of=date(2023, 1, 1))
    assert pickle.loads(pickle.dumps(g)) == g


def test_indexed_is_sorted():
    g = LiquidityGraph.from_edges([("c", "a"), ("b", "a")])
    labels, adj = g.indexed()
    assert labels == ["a", "b", "c"]
    assert adj == [[1, 2], [0], [0]]
