"""Static network metrics: degrees, components, betweenness, k-cores, Gini."""

from __future__ import annotations

import math
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .model import LiquidityGraph, edge_key
from .unionfind import UnionFind

SCORE_FLOOR = 1e-12

# Sources are split into fixed-size chunks so the per-chunk partial sums,
# and hence the final scores, do not depend on the worker count.
BETWEENNESS_CHUNK = 64


@dataclass
class CentralityReport:
    kind: str  # "node" or "edge"
    normalized: bool
    scores: dict
    top_k: list = field(default_factory=list)

    def ranking(self):
        """All (id, score) pairs, score descending then id ascending."""
        return sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass
class CoreDecomposition:
    core_number: dict[str, int]
    max_k: int
    k_group_sizes: dict[int, int]


@dataclass
class Components:
    count: int
    sizes: list[int]


def degree_distribution(graph: LiquidityGraph) -> dict[int, int]:
    counts = Counter(graph.degrees().values())
    return dict(sorted(counts.items()))


def average_degree(graph: LiquidityGraph) -> float:
    n = graph.number_of_nodes()
    if n == 0:
        raise ValueError("average degree of an empty graph is undefined")
    return 2 * graph.number_of_edges() / n


def components(graph: LiquidityGraph) -> Components:
    uf = UnionFind(graph.nodes)
    for u, v in graph.edges:
        uf.union(u, v)
    return Components(uf.count, uf.component_sizes())


# -- betweenness ---------------------------------------------------------------

def _edge_ids(adj):
    ids = {}
    adj_eid = []
    for v, ns in enumerate(adj):
        row = []
        for w in ns:
            key = (v, w) if v < w else (w, v)
            if key not in ids:
                ids[key] = len(ids)
            row.append(ids[key])
        adj_eid.append(row)
    return ids, adj_eid


_WORKER_STATE = None


def _init_worker(adj, adj_eid, n_edges):
    global _WORKER_STATE
    _WORKER_STATE = (adj, adj_eid, n_edges)


def _brandes_chunk(sources, adj=None, adj_eid=None, n_edges=None):
    if adj is None:
        adj, adj_eid, n_edges = _WORKER_STATE
    n = len(adj)
    node_acc = [0.0] * n
    edge_acc = [0.0] * n_edges
    for s in sources:
        sigma = [0] * n
        dist = [-1] * n
        pred = [[] for _ in range(n)]
        sigma[s] = 1
        dist[s] = 0
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v] + 1
            for w, eid in zip(adj[v], adj_eid[v]):
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    pred[w].append((v, eid))
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v, eid in pred[w]:
                c = sigma[v] * coeff
                edge_acc[eid] += c
                delta[v] += c
            if w != s:
                node_acc[w] += delta[w]
    return node_acc, edge_acc


def _betweenness_raw(graph: LiquidityGraph, parallelism: int = 1):
    """Unnormalised node and edge betweenness over unordered source/target pairs."""
    labels, adj = graph.indexed()
    n = len(labels)
    ids, adj_eid = _edge_ids(adj)
    chunks = [range(i, min(i + BETWEENNESS_CHUNK, n)) for i in range(0, n, BETWEENNESS_CHUNK)]
    if parallelism > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(
            max_workers=parallelism, initializer=_init_worker, initargs=(adj, adj_eid, len(ids))
        ) as pool:
            partials = list(pool.map(_brandes_chunk, chunks))
    else:
        partials = [_brandes_chunk(c, adj, adj_eid, len(ids)) for c in chunks]

    # fsum is correctly rounded, so the combined value is independent of
    # chunk order as well.
    node_raw = [math.fsum(p[0][i] for p in partials) / 2.0 for i in range(n)]
    edge_raw = [math.fsum(p[1][e] for p in partials) / 2.0 for e in range(len(ids))]
    node_scores = {labels[i]: node_raw[i] for i in range(n)}
    edge_scores = {(labels[a], labels[b]): edge_raw[e] for (a, b), e in ids.items()}
    return node_scores, edge_scores


def _report(kind, scores, normalized, top_k):
    scores = {k: (0.0 if v < SCORE_FLOOR else v) for k, v in scores.items()}
    report = CentralityReport(kind, normalized, scores)
    report.top_k = report.ranking()[:top_k]
    return report


def node_betweenness(graph: LiquidityGraph, normalized: bool = True, parallelism: int = 1,
                     top_k: int = 10) -> CentralityReport:
    """Hop-count betweenness of every token.

    Normalisation divides by (n-1)(n-2)/2 with n the size of the whole graph,
    so pairs in different components simply contribute nothing. Graphs with
    fewer than three nodes get all-zero normalised scores.
    """
    scores, _ = _betweenness_raw(graph, parallelism)
    if normalized:
        n = graph.number_of_nodes()
        scale = (n - 1) * (n - 2) / 2
        scores = {v: (s / scale if scale > 0 else 0.0) for v, s in scores.items()}
    return _report("node", scores, normalized, top_k)


def edge_betweenness(graph: LiquidityGraph, normalized: bool = True, parallelism: int = 1,
                     top_k: int = 10) -> CentralityReport:
    _, scores = _betweenness_raw(graph, parallelism)
    if normalized:
        n = graph.number_of_nodes()
        scale = n * (n - 1) / 2
        scores = {e: (s / scale if scale > 0 else 0.0) for e, s in scores.items()}
    return _report("edge", scores, normalized, top_k)


def betweenness(graph: LiquidityGraph, normalized: bool = True, parallelism: int = 1,
                top_k: int = 10) -> tuple[CentralityReport, CentralityReport]:
    """Node and edge reports from a single Brandes pass."""
    nodes, edges = _betweenness_raw(graph, parallelism)
    if normalized:
        n = graph.number_of_nodes()
        ns = (n - 1) * (n - 2) / 2
        es = n * (n - 1) / 2
        nodes = {v: (s / ns if ns > 0 else 0.0) for v, s in nodes.items()}
        edges = {e: (s / es if es > 0 else 0.0) for e, s in edges.items()}
    return _report("node", nodes, normalized, top_k), _report("edge", edges, normalized, top_k)


# -- k-core --------------------------------------------------------------------

def core_numbers(graph: LiquidityGraph) -> dict[str, int]:
    """Batagelj-Zaversnik bucket peeling, O(n + m)."""
    labels, adj = graph.indexed()
    n = len(labels)
    if n == 0:
        return {}
    deg = [len(ns) for ns in adj]
    max_deg = max(deg)
    bin_start = [0] * (max_deg + 2)
    for d in deg:
        bin_start[d + 1] += 1
    for d in range(1, max_deg + 2):
        bin_start[d] += bin_start[d - 1]
    pos = [0] * n
    vert = [0] * n
    fill = bin_start[:]
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    for i in range(n):
        v = vert[i]
        for u in adj[v]:
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bin_start[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pu
                    vert[pu], vert[pw] = w, u
                bin_start[du] += 1
                deg[u] -= 1
    return {labels[v]: deg[v] for v in range(n)}


def core_decomposition(graph: LiquidityGraph) -> CoreDecomposition:
    cores = core_numbers(graph)
    max_k = max(cores.values(), default=0)
    hist = Counter(cores.values())
    sizes = {}
    running = 0
    for k in range(max_k, -1, -1):
        running += hist.get(k, 0)
        sizes[k] = running
    return CoreDecomposition(cores, max_k, dict(sorted(sizes.items())) if cores else {})


def max_core_subgraph(graph: LiquidityGraph, decomposition: CoreDecomposition | None = None):
    """Return ``(k, subgraph)`` for the innermost non-empty k-core."""
    if graph.number_of_nodes() == 0:
        raise ValueError("max core of an empty graph is undefined")
    dec = decomposition or core_decomposition(graph)
    keep = [v for v, c in dec.core_number.items() if c >= dec.max_k]
    return dec.max_k, graph.subgraph(keep)


# -- inequality ----------------------------------------------------------------

def gini(values: Iterable) -> float:
    """Gini coefficient via the sorted-rank identity.

    G = 2 * sum(i * x_(i)) / (n * sum(x)) - (n + 1) / n, ranks starting at 1.
    """
    x = np.sort(np.asarray([float(v) for v in values], dtype=np.float64))
    if x.size == 0:
        raise ValueError("gini of an empty collection")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("gini requires finite non-negative values")
    total = math.fsum(x)
    if total <= 0:
        raise ValueError("gini is undefined when all values are zero")
    n = x.size
    ranks = np.arange(1, n + 1, dtype=np.float64)
    weighted = math.fsum(ranks * x)
    return 2.0 * weighted / (n * total) - (n + 1) / n


# -- random reference ----------------------------------------------------------

def random_reference(n: int, m: int, seed: int | np.random.Generator) -> LiquidityGraph:
    """Uniform G(n, m) graph by rejection sampling of unordered node pairs."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    max_edges = n * (n - 1) // 2
    if m > max_edges:
        raise ValueError(f"{m} edges do not fit in a simple graph on {n} nodes (max {max_edges})")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    width = len(str(max(n - 1, 0)))
    labels = [f"r{i:0{width}d}" for i in range(n)]

    # Dense requests: sample the complement instead.
    complement = m > max_edges // 2
    target = max_edges - m if complement else m
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < target:
        need = target - len(chosen)
        draws = rng.integers(0, n, size=(need + need // 10 + 8, 2))
        for a, b in draws.tolist():
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key in chosen:
                continue
            chosen.add(key)
            if len(chosen) == target:
                break
    if complement:
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in chosen]
    else:
        pairs = chosen
    return LiquidityGraph.from_edges(
        ((labels[a], labels[b]) for a, b in sorted(pairs)), nodes=labels
    )


def core_periphery_summary(graph: LiquidityGraph) -> dict:
    dec = core_decomposition(graph)
    k, core = max_core_subgraph(graph, dec)
    return {
        "nodes": graph.number_of_nodes(),
        "average_degree": average_degree(graph),
        "max_k": k,
        "kcore_size": core.number_of_nodes(),
        "kcore_average_degree": average_degree(core),
    }


def core_periphery_comparison(graph: LiquidityGraph, seed) -> dict[str, tuple]:
    """Observed vs. same-size random graph: {metric: (observed, random)}."""
    if graph.number_of_nodes() == 0:
        raise ValueError("comparison needs a non-empty graph")
    observed = core_periphery_summary(graph)
    ref = random_reference(graph.number_of_nodes(), graph.number_of_edges(), seed)
    rand = core_periphery_summary(ref)
    return {key: (observed[key], rand[key]) for key in observed}


def edge_id(u: str, v: str) -> str:
    a, b = edge_key(u, v)
    return f"{a}-{b}"
