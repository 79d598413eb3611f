"""Token-collapse simulation.

A collapsing token takes every pool it belongs to with it. Tokens are
removed one at a time in a ranked order and after each removal we record
the surviving pool count, the number of connected components among the
surviving tokens (isolated tokens count) and the share of initial pool TVL
that has been lost.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import DataIntegrityError
from .ingest.records import PROTECTED_TOKENS
from .metrics import node_betweenness
from .model import LiquidityGraph
from .unionfind import UnionFind

STRATEGIES = ("tvl", "betweenness", "degree", "random")
CSV_COLUMNS = ("strategy", "step", "removed_token", "edges_remaining", "components", "tvl_lost_fraction")


@dataclass(frozen=True)
class AttackPlan:
    strategy: str
    protected: frozenset = frozenset(PROTECTED_TOKENS)
    n_remove: int = 1000
    seed: int = 0
    recompute_ranking: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {', '.join(STRATEGIES)}")
        if self.n_remove < 0:
            raise ValueError("n_remove must be non-negative")
        object.__setattr__(self, "protected", frozenset(self.protected))

    def validate(self, graph: LiquidityGraph):
        available = graph.number_of_nodes() - len(self.protected & graph.nodes.keys())
        if self.n_remove > available:
            raise ValueError(
                f"cannot remove {self.n_remove} tokens: only {available} unprotected tokens in the graph"
            )


@dataclass(frozen=True)
class RemovalStep:
    step: int
    removed_token: str
    edges_remaining: int
    components: int
    tvl_lost_fraction: float


@dataclass
class RemovalTrace:
    plan: AttackPlan | None
    initial_edges: int
    initial_components: int
    initial_tvl_usd: Decimal
    steps: list[RemovalStep] = field(default_factory=list)

    @property
    def order(self) -> list[str]:
        return [s.removed_token for s in self.steps]


def _ranked(keyed: Iterable[tuple], protected) -> list[str]:
    """Sort (token, score) descending by score, ascending by token on ties."""
    return [t for t, _ in sorted(keyed, key=lambda kv: (-kv[1], kv[0])) if t not in protected]


def rank_tokens(graph: LiquidityGraph, strategy: str, protected: Iterable[str] = (), seed=0,
                parallelism: int = 1) -> list[str]:
    """Removal order for ``strategy``, protected tokens excluded."""
    if graph.number_of_nodes() == 0:
        raise ValueError("cannot rank tokens of an empty graph")
    protected = set(protected)
    if strategy == "tvl":
        return _ranked(((v, a.tvl_usd) for v, a in graph.nodes.items()), protected)
    if strategy == "degree":
        return _ranked(graph.degrees().items(), protected)
    if strategy == "betweenness":
        scores = node_betweenness(graph, normalized=True, parallelism=parallelism).scores
        return _ranked(scores.items(), protected)
    if strategy == "random":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        tokens = sorted(v for v in graph.nodes if v not in protected)
        return [tokens[i] for i in rng.permutation(len(tokens))]
    raise ValueError(f"unknown strategy {strategy!r}")


def _fraction(lost: Decimal, initial: Decimal) -> float:
    if initial <= 0:
        return 0.0
    return float(lost / initial)


def simulate_removal(graph: LiquidityGraph, order: Sequence[str], n_remove: int,
                     plan: AttackPlan | None = None) -> RemovalTrace:
    """Delete the first ``n_remove`` tokens of ``order`` and trace the damage.

    Component counts come from an offline reverse pass: start from the graph
    with every removed token gone and add tokens back in reverse order with a
    union-find, which costs O((n + m) alpha(n)) for the whole trace.
    """
    if n_remove < 0 or n_remove > len(order):
        raise ValueError(f"n_remove={n_remove} outside [0, {len(order)}]")
    removed = list(order[:n_remove])
    if len(set(removed)) != len(removed):
        raise DataIntegrityError("removal order repeats a token")
    for v in removed:
        if v not in graph:
            raise DataIntegrityError(f"token {v} in removal order is not in the graph")

    initial_tvl = graph.total_edge_tvl()
    initial_edges = graph.number_of_edges()
    removal_step = {v: i for i, v in enumerate(removed)}
    gone = set()

    # forward pass: pool losses
    edges_left = []
    lost_fraction = []
    remaining = initial_edges
    lost = Decimal(0)
    for v in removed:
        for u in graph.neighbors(v):
            if u not in gone:
                remaining -= 1
                lost += graph.edge(u, v).tvl_usd
        gone.add(v)
        edges_left.append(remaining)
        lost_fraction.append(_fraction(lost, initial_tvl))

    # reverse pass: components after each step
    uf = UnionFind(v for v in graph.nodes if v not in removal_step)
    for u, v in graph.edges:
        if u not in removal_step and v not in removal_step:
            uf.union(u, v)
    comps = [0] * n_remove
    for i in range(n_remove - 1, -1, -1):
        comps[i] = uf.count
        v = removed[i]
        uf.add(v)
        for u in graph.neighbors(v):
            if u in uf:
                uf.union(u, v)
    initial_components = uf.count

    steps = [
        RemovalStep(i + 1, removed[i], edges_left[i], comps[i], lost_fraction[i]) for i in range(n_remove)
    ]
    return RemovalTrace(plan, initial_edges, initial_components, initial_tvl, steps)


def _adaptive_order(graph: LiquidityGraph, plan: AttackPlan, parallelism: int) -> list[str]:
    order = []
    current = graph
    for _ in range(plan.n_remove):
        ranking = rank_tokens(current, plan.strategy, plan.protected | set(order), plan.seed + len(order),
                              parallelism)
        order.append(ranking[0])
        current = current.without([ranking[0]])
    return order


def run_plan(graph: LiquidityGraph, plan: AttackPlan, parallelism: int = 1) -> RemovalTrace:
    plan.validate(graph)
    if plan.recompute_ranking and plan.strategy != "random":
        order = _adaptive_order(graph, plan, parallelism)
    else:
        order = rank_tokens(graph, plan.strategy, plan.protected, plan.seed, parallelism)
    return simulate_removal(graph, order, plan.n_remove, plan)


def _run_plan_args(args):
    return run_plan(*args)


def run_attack_suite(graph: LiquidityGraph, plans: Sequence[AttackPlan], parallelism: int = 1) -> dict:
    """One trace per plan, keyed by strategy, in plan order."""
    strategies = [p.strategy for p in plans]
    if len(set(strategies)) != len(strategies):
        raise ValueError("at most one plan per strategy")
    for p in plans:
        p.validate(graph)
    if parallelism > 1 and len(plans) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            traces = list(pool.map(_run_plan_args, [(graph, p, 1) for p in plans]))
    else:
        traces = [run_plan(graph, p, parallelism) for p in plans]
    return dict(zip(strategies, traces))
