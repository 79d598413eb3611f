"""Token graph data model.

Nodes are ERC-20 token addresses, edges are liquidity pools. A graph is an
immutable snapshot of the market as of one UTC day.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from decimal import Decimal
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import DataIntegrityError, NotFoundError

ADDRESS_RE = re.compile(r"^0x[0-9a-f]{40}$")

ZERO = Decimal("0")


def is_address(value: str) -> bool:
    return isinstance(value, str) and ADDRESS_RE.match(value) is not None


def end_of_day(day: date) -> int:
    """Last unix second belonging to ``day`` (UTC)."""
    start = datetime.combine(day, time(0), tzinfo=timezone.utc)
    return int((start + timedelta(days=1)).timestamp()) - 1


def utc_day(timestamp: int) -> date:
    return datetime.fromtimestamp(int(timestamp), tz=timezone.utc).date()


@dataclass(frozen=True)
class TokenRecord:
    address: str
    symbol: str = ""
    name: str = ""


@dataclass(frozen=True)
class PairRecord:
    pair_address: str
    token0: str
    token1: str
    created_at: int

    @property
    def key(self) -> tuple[str, str]:
        return edge_key(self.token0, self.token1)


@dataclass(frozen=True)
class NodeAttrs:
    symbol: str = ""
    tvl_usd: Decimal = ZERO


@dataclass(frozen=True)
class EdgeAttrs:
    pair_address: str = ""
    tvl_usd: Decimal = ZERO
    created_at: int = 0


def edge_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


class LiquidityGraph:
    """Simple undirected graph with TVL-weighted nodes and edges.

    Instances are immutable; derived views (``subgraph``, ``without``) return
    new graphs. Node ids are arbitrary strings, normally token addresses.
    """

    __slots__ = ("_nodes", "_edges", "_adj", "as_of", "_indexed")

    def __init__(
        self,
        nodes: Mapping[str, NodeAttrs],
        edges: Mapping[tuple[str, str], EdgeAttrs],
        as_of: date | None = None,
    ):
        adj: dict[str, set[str]] = {v: set() for v in nodes}
        clean_edges: dict[tuple[str, str], EdgeAttrs] = {}
        for (u, v), attrs in edges.items():
            if u == v:
                raise DataIntegrityError(f"self-loop on {u}")
            if u not in adj or v not in adj:
                raise DataIntegrityError(f"edge ({u}, {v}) has an endpoint outside the node set")
            key = edge_key(u, v)
            if key in clean_edges:
                raise DataIntegrityError(f"parallel edge between {u} and {v}")
            if attrs.tvl_usd < 0:
                raise DataIntegrityError(f"negative TVL on edge ({u}, {v})")
            clean_edges[key] = attrs
            adj[u].add(v)
            adj[v].add(u)
        for v, attrs in nodes.items():
            if attrs.tvl_usd < 0:
                raise DataIntegrityError(f"negative TVL on node {v}")
        self._nodes = MappingProxyType(dict(sorted(nodes.items())))
        self._edges = MappingProxyType(dict(sorted(clean_edges.items())))
        self._adj = MappingProxyType({v: frozenset(ns) for v, ns in adj.items()})
        self.as_of = as_of
        self._indexed = None

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = (), as_of=None):
        """Topology-only graph with default (zero) attributes."""
        node_map = {v: NodeAttrs() for v in nodes}
        edge_map = {}
        for u, v in edges:
            node_map.setdefault(u, NodeAttrs())
            node_map.setdefault(v, NodeAttrs())
            key = edge_key(u, v)
            if key in edge_map:
                raise DataIntegrityError(f"parallel edge between {u} and {v}")
            edge_map[key] = EdgeAttrs()
        return cls(node_map, edge_map, as_of)

    @property
    def nodes(self) -> Mapping[str, NodeAttrs]:
        return self._nodes

    @property
    def edges(self) -> Mapping[tuple[str, str], EdgeAttrs]:
        return self._edges

    def number_of_nodes(self) -> int:
        return len(self._nodes)

    def number_of_edges(self) -> int:
        return len(self._edges)

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, node) -> bool:
        return node in self._nodes

    def neighbors(self, node: str) -> frozenset[str]:
        try:
            return self._adj[node]
        except KeyError:
            raise NotFoundError(f"token {node} not in graph") from None

    def degree(self, node: str) -> int:
        return len(self.neighbors(node))

    def degrees(self) -> dict[str, int]:
        return {v: len(ns) for v, ns in self._adj.items()}

    def has_edge(self, u: str, v: str) -> bool:
        return edge_key(u, v) in self._edges

    def edge(self, u: str, v: str) -> EdgeAttrs:
        try:
            return self._edges[edge_key(u, v)]
        except KeyError:
            raise NotFoundError(f"no edge between {u} and {v}") from None

    def subgraph(self, keep: Iterable[str]) -> "LiquidityGraph":
        """Induced subgraph on ``keep``."""
        keep = set(keep)
        missing = keep - self._nodes.keys()
        if missing:
            raise NotFoundError(f"tokens not in graph: {sorted(missing)[:5]}")
        nodes = {v: a for v, a in self._nodes.items() if v in keep}
        edges = {k: a for k, a in self._edges.items() if k[0] in keep and k[1] in keep}
        return LiquidityGraph(nodes, edges, self.as_of)

    def without(self, drop: Iterable[str]) -> "LiquidityGraph":
        drop = set(drop)
        return self.subgraph(v for v in self._nodes if v not in drop)

    def indexed(self) -> tuple[list[str], list[list[int]]]:
        """Sorted node labels and integer adjacency lists, cached."""
        if self._indexed is None:
            labels = list(self._nodes)
            pos = {v: i for i, v in enumerate(labels)}
            adj = [sorted(pos[u] for u in self._adj[v]) for v in labels]
            self._indexed = (labels, adj)
        return self._indexed

    def total_edge_tvl(self) -> Decimal:
        return sum((a.tvl_usd for a in self._edges.values()), ZERO)

    def __eq__(self, other):
        if not isinstance(other, LiquidityGraph):
            return NotImplemented
        return (
            self.as_of == other.as_of
            and dict(self._nodes) == dict(other._nodes)
            and dict(self._edges) == dict(other._edges)
        )

    def __reduce__(self):
        return (LiquidityGraph, (dict(self._nodes), dict(self._edges), self.as_of))

    def __hash__(self):
        return hash((self.as_of, len(self._nodes), len(self._edges)))

    def __repr__(self):
        return f"LiquidityGraph(nodes={len(self._nodes)}, edges={len(self._edges)}, as_of={self.as_of})"


def build_graph(
    pairs: Iterable[PairRecord],
    pool_tvl: Mapping[str, Decimal] | None = None,
    token_tvl: Mapping[str, Decimal] | None = None,
    token_meta: Mapping[str, TokenRecord] | None = None,
    as_of: date | None = None,
) -> LiquidityGraph:
    """Build the token graph from pool records.

    Only pairs created on or before ``as_of`` (UTC, inclusive of the whole
    day) are included; ``as_of=None`` includes every pair. Missing TVL
    values default to zero.
    """
    pool_tvl = pool_tvl or {}
    token_tvl = token_tvl or {}
    token_meta = token_meta or {}
    cutoff = end_of_day(as_of) if as_of is not None else None

    seen: dict[tuple[str, str], str] = {}
    nodes: dict[str, NodeAttrs] = {}
    edges: dict[tuple[str, str], EdgeAttrs] = {}
    for p in sorted(pairs, key=lambda p: p.pair_address):
        if p.token0 == p.token1:
            raise DataIntegrityError(f"pair {p.pair_address} pairs token {p.token0} with itself")
        key = p.key
        if key in seen:
            raise DataIntegrityError(
                f"pairs {seen[key]} and {p.pair_address} both connect {key[0]} and {key[1]}"
            )
        seen[key] = p.pair_address
        if cutoff is not None and p.created_at > cutoff:
            continue
        for t in key:
            if t not in nodes:
                meta = token_meta.get(t)
                nodes[t] = NodeAttrs(
                    symbol=meta.symbol if meta else "",
                    tvl_usd=Decimal(token_tvl.get(t, ZERO)),
                )
        edges[key] = EdgeAttrs(
            pair_address=p.pair_address,
            tvl_usd=Decimal(pool_tvl.get(p.pair_address, ZERO)),
            created_at=p.created_at,
        )
    return LiquidityGraph(nodes, edges, as_of)


def degree(graph: LiquidityGraph, token: str) -> int:
    return graph.degree(token)
