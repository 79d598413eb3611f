"""Daily cumulative networks and their evolution statistics."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Callable, Iterable, Mapping

from .errors import DegenerateInputError
from .metrics import average_degree, core_decomposition, max_core_subgraph
from .model import LiquidityGraph, PairRecord, TokenRecord, build_graph, end_of_day
from .powerlaw import fit
from .unionfind import UnionFind

CSV_COLUMNS = (
    "date", "nodes", "edges", "components", "avg_degree", "alpha",
    "max_k", "kcore_size", "kcore_avg_degree", "kcore_ratio",
)


@dataclass
class EvolutionRow:
    date: date
    nodes: int
    edges: int
    components: int
    avg_degree: float | None = None
    alpha: float | None = None
    max_k: int | None = None
    kcore_size: int | None = None
    kcore_avg_degree: float | None = None
    kcore_ratio: float | None = None
    error: str | None = None


@dataclass
class EvolutionSeries:
    rows: list[EvolutionRow]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name):
        return [getattr(r, name) for r in self.rows]


def daily_snapshots(
    pairs: Iterable[PairRecord],
    start: date,
    end: date,
    token_meta: Mapping[str, TokenRecord] | None = None,
    tvl_for_day: Callable[[date], tuple[Mapping, Mapping]] | None = None,
) -> list[LiquidityGraph]:
    """One cumulative graph per day: all pools created up to the end of that day.

    Snapshots are topology-only unless ``tvl_for_day`` is given; it returns
    ``(pool_tvl, token_tvl)`` maps for a day.
    """
    if start > end:
        raise ValueError(f"start {start} is after end {end}")
    pairs = sorted(pairs, key=lambda p: (p.created_at, p.pair_address))
    # validates self-loops and duplicate pools once for the whole dataset
    build_graph(pairs)
    snapshots = []
    included: list[PairRecord] = []
    i = 0
    day = start
    while day <= end:
        cutoff = end_of_day(day)
        while i < len(pairs) and pairs[i].created_at <= cutoff:
            included.append(pairs[i])
            i += 1
        pool_tvl, token_tvl = tvl_for_day(day) if tvl_for_day else (None, None)
        snapshots.append(build_graph(included, pool_tvl, token_tvl, token_meta, as_of=day))
        day += timedelta(days=1)
    return snapshots


def _row_metrics(graph: LiquidityGraph) -> dict:
    """Everything in a row except the component count."""
    if graph.number_of_nodes() == 0:
        return {"error": "empty graph"}
    out = {"avg_degree": average_degree(graph)}
    try:
        degrees = [d for d in graph.degrees().values() if d > 0]
        out["alpha"] = fit(degrees, mode="discrete").alpha
    except (DegenerateInputError, ValueError):
        out["alpha"] = None
    dec = core_decomposition(graph)
    k, core = max_core_subgraph(graph, dec)
    out["max_k"] = k
    out["kcore_size"] = core.number_of_nodes()
    out["kcore_avg_degree"] = average_degree(core)
    out["kcore_ratio"] = core.number_of_nodes() / graph.number_of_nodes()
    return out


def _safe_row_metrics(graph):
    try:
        return _row_metrics(graph)
    except Exception as exc:  # recorded per row, the series keeps going
        return {"error": f"{type(exc).__name__}: {exc}"}


def component_counts(snapshots: Iterable[LiquidityGraph]) -> list[int]:
    """Component count per snapshot, extending one union-find while snapshots nest."""
    counts = []
    uf = None
    prev_edges: set = set()
    for g in snapshots:
        edges = g.edges.keys()
        if uf is None or not prev_edges <= edges or not set(uf.parent) <= g.nodes.keys():
            uf = UnionFind()
            prev_edges = set()
        for v in g.nodes:
            uf.add(v)
        for e in edges:
            if e not in prev_edges:
                uf.union(*e)
        prev_edges = set(edges)
        counts.append(uf.count)
    return counts


def evolution_series(snapshots: Iterable[LiquidityGraph], parallelism: int = 1) -> EvolutionSeries:
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("evolution series needs at least one snapshot")
    days = [g.as_of for g in snapshots]
    if any(d is None for d in days) or any(a >= b for a, b in zip(days, days[1:])):
        raise ValueError("snapshots must carry strictly increasing dates")
    counts = component_counts(snapshots)
    if parallelism > 1 and len(snapshots) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            metrics = list(pool.map(_safe_row_metrics, snapshots, chunksize=8))
    else:
        metrics = [_safe_row_metrics(g) for g in snapshots]
    rows = [
        EvolutionRow(g.as_of, g.number_of_nodes(), g.number_of_edges(), c, **m)
        for g, c, m in zip(snapshots, counts, metrics)
    ]
    return EvolutionSeries(rows)


def row_values(row: EvolutionRow) -> tuple:
    """Values in CSV column order."""
    return tuple(getattr(row, c) for c in CSV_COLUMNS)
