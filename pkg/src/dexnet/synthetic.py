"""Synthetic scale-free token markets.

Tokens arrive one at a time. Each newcomer lists ``m`` pools (1 most of the
time, up to ``max_pools``); partners are picked by preferential attachment
or, with probability ``uniform_prob``, uniformly among existing tokens, and
after the first partner each further partner is a neighbour of the first
with probability ``triad_prob`` (triad closure).

``python -m dexnet.synthetic OUT_DIR`` writes the bundled JSON Lines fixture.
"""

from __future__ import annotations

import argparse
import hashlib
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from decimal import Decimal
from pathlib import Path

import numpy as np

from .ingest.dataset import normalize_dataset, write_dataset
from .ingest.records import DAI, USDC, USDT, WBTC, WETH, Dataset, PairDaySample, TokenDaySample
from .ingest.tvl import usd
from .model import EdgeAttrs, LiquidityGraph, NodeAttrs, PairRecord, TokenRecord, edge_key


@dataclass(frozen=True)
class MarketParams:
    multi_prob: float = 0.66
    triad_prob: float = 0.68
    max_pools: int = 4
    uniform_prob: float = 0.61
    core: int = 3


def token_address(i: int, salt: str = "token") -> str:
    return "0x" + hashlib.sha256(f"{salt}:{i}".encode()).hexdigest()[:40]


def grow_market(n: int, rng: np.random.Generator, params: MarketParams = MarketParams()):
    """Edge list (u, v) of integer token ids in creation order."""
    if n < params.core:
        raise ValueError("n must be at least the core size")
    adj = [[] for _ in range(n)]
    edges = []
    targets = []

    def connect(u, v):
        adj[u].append(v)
        adj[v].append(u)
        edges.append((u, v))
        targets.extend((u, v))

    for v in range(1, params.core):
        for u in range(v):
            connect(u, v)

    def pick(v):
        if rng.random() < params.uniform_prob or not targets:
            return int(rng.integers(v))
        return targets[int(rng.integers(len(targets)))]

    for v in range(params.core, n):
        m = 1 if rng.random() >= params.multi_prob else int(rng.integers(2, params.max_pools + 1))
        m = min(m, v)
        first = pick(v)
        chosen = [first]
        while len(chosen) < m:
            near = [u for u in adj[first] if u not in chosen]
            if near and rng.random() < params.triad_prob:
                u = near[int(rng.integers(len(near)))]
            else:
                u = pick(v)
            if u not in chosen:
                chosen.append(u)
        for u in chosen:
            connect(u, v)
    return edges


def scale_free_graph(n: int, seed: int, n_protected: int = 4, params: MarketParams = MarketParams()):
    """Graph with heavy-tailed pool TVL plus the ``n_protected`` highest-degree tokens.

    Pool TVL is lognormal scaled by the geometric mean of the endpoint
    degrees; token TVL is half the TVL of each of its pools.
    """
    rng = np.random.default_rng(seed)
    edges = grow_market(n, rng, params)
    deg = np.zeros(n)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    labels = [token_address(i, f"sf{seed}") for i in range(n)]
    edge_attrs = {}
    node_tvl = [Decimal(0)] * n
    for u, v in edges:
        tvl = usd(rng.lognormal(0.0, 1.5) * math.sqrt(deg[u] * deg[v]) * 1000)
        edge_attrs[edge_key(labels[u], labels[v])] = EdgeAttrs(token_address(len(edge_attrs), "pool"), tvl, 0)
        node_tvl[u] += tvl / 2
        node_tvl[v] += tvl / 2
    nodes = {labels[i]: NodeAttrs(f"T{i}", usd(node_tvl[i])) for i in range(n)}
    graph = LiquidityGraph(nodes, edge_attrs)
    ranked = sorted(range(n), key=lambda i: (-deg[i], labels[i]))
    return graph, {labels[i] for i in ranked[:n_protected]}


# -- bundled dataset -----------------------------------------------------------

TRUSTED_META = [
    (WETH, "WETH", "Wrapped Ether", 1800.0),
    (USDC, "USDC", "USD Coin", 1.0),
    (USDT, "USDT", "Tether USD", 1.0),
    (DAI, "DAI", "Dai Stablecoin", 1.0),
    (WBTC, "WBTC", "Wrapped BTC", 30000.0),
]


def _ts(day: date, seconds: int = 0) -> int:
    return int(datetime(day.year, day.month, day.day, tzinfo=timezone.utc).timestamp()) + seconds


def synthetic_dataset(n_tokens: int = 360, seed: int = 20231031, start: date = date(2023, 8, 1),
                      end: date = date(2023, 10, 31), sample_days: int = 7) -> tuple[Dataset, dict]:
    """Schema-faithful dataset plus reference prices for the trusted tokens.

    The five trusted tokens form the initial fully connected core. Pool-day
    samples exist for each pool's creation day and the last ``sample_days``
    days. A few planted anomalies exercise the outlier filter and the
    negative-contribution clamp.
    """
    rng = np.random.default_rng(seed)
    params = MarketParams(multi_prob=0.2, triad_prob=0.5, max_pools=4, uniform_prob=0.05,
                          core=len(TRUSTED_META))
    edges = grow_market(n_tokens, rng, params)
    days = [start + timedelta(days=i) for i in range((end - start).days + 1)]

    tokens = {}
    addresses = []
    for i in range(n_tokens):
        if i < len(TRUSTED_META):
            addr, sym, name, _ = TRUSTED_META[i]
        else:
            addr, sym, name = token_address(i, "dataset"), f"TKN{i}", f"Synthetic Token {i}"
        addresses.append(addr)
        tokens[addr] = TokenRecord(addr, sym, name)
    trusted_idx = set(range(len(TRUSTED_META)))

    # daily prices: trusted tokens follow a small random walk, others a noisy one
    base = [TRUSTED_META[i][3] if i in trusted_idx else float(np.exp(rng.normal(-3, 3)))
            for i in range(n_tokens)]
    vol = [0.0005 if i in (1, 2, 3) else 0.02 if i in trusted_idx else 0.08 for i in range(n_tokens)]
    walk = np.exp(np.cumsum(rng.normal(0, 1, (len(days), n_tokens)) * np.array(vol), axis=0))
    price = walk * np.array(base)

    # creation: core pools on day one, the rest spread over the range in order
    n_core = len(TRUSTED_META) * (len(TRUSTED_META) - 1) // 2
    span = len(days) - 1
    created = []
    for k, (u, v) in enumerate(edges):
        if k < n_core:
            created.append(_ts(days[0], 3600 * (k + 1)))
        else:
            frac = (max(u, v) - len(TRUSTED_META)) / max(n_tokens - len(TRUSTED_META), 1)
            created.append(_ts(days[int(frac * span)], int(rng.integers(0, 86400))))

    deg = np.zeros(n_tokens)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1

    pairs = []
    pair_days = []
    sample_set = set(days[-sample_days:])
    anomalies = {"cap": 0, "deviation": 0, "stale": 0}
    for k, (u, v) in enumerate(edges):
        a, b = addresses[u], addresses[v]
        # token0 < token1 as on the V2 factory
        if b < a:
            u, v, a, b = v, u, b, a
        pair_addr = token_address(k, "pair")
        pairs.append(PairRecord(pair_addr, a, b, created[k]))
        value = float(rng.lognormal(8.0, 2.0) * math.sqrt(deg[u] * deg[v]))
        kind = None
        untrusted = u not in trusted_idx and v not in trusted_idx
        if untrusted and anomalies["cap"] < 3:
            kind = "cap"
        elif WETH in (a, b) and k >= n_core + 50 and anomalies["deviation"] < 2:
            kind = "deviation"
        elif (u in trusted_idx) != (v in trusted_idx) and k >= n_core + 100 and anomalies["stale"] < 2:
            kind = "stale"
        if kind:
            anomalies[kind] += 1
        created_day = datetime.fromtimestamp(created[k], tz=timezone.utc).date()
        for di, day in enumerate(days):
            if day < created_day or (day != created_day and day not in sample_set):
                continue
            drift = float(np.exp(rng.normal(0, 0.05)))
            half = value * drift / 2
            r0 = half / price[di, u]
            r1 = half / price[di, v]
            reserve_usd = 2 * half
            if kind == "cap":
                reserve_usd = 1e13 * drift
            elif kind == "deviation":
                reserve_usd = 20 * half
            elif kind == "stale":
                reserve_usd = 0.8 * half
            pair_days.append(PairDaySample(pair_addr, day, _dec(r0, 12), _dec(r1, 12), usd(reserve_usd)))

    token_days = [
        TokenDaySample(addresses[i], day, _dec(price[di, i], 10))
        for di, day in enumerate(days) for i in range(n_tokens)
        if i in trusted_idx or day in sample_set
    ]
    reference = {
        (addresses[i], day): _dec(price[di, i] * float(np.exp(rng.normal(0, 0.002))), 6)
        for di, day in enumerate(days) for i in trusted_idx
    }
    return normalize_dataset(pairs, pair_days, token_days, tokens), reference


def _dec(x: float, places: int) -> Decimal:
    return Decimal(repr(float(x))).quantize(Decimal(1).scaleb(-places))


def write_fixture(out_dir, **kwargs) -> Path:
    dataset, reference = synthetic_dataset(**kwargs)
    root = write_dataset(dataset, out_dir)
    with open(root / "reference_prices.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("token_address,date,price_usd\n")
        for (token, day), p in sorted(reference.items()):
            fh.write(f"{token},{day.isoformat()},{format(p, 'f')}\n")
    return root


def main(argv=None):
    parser = argparse.ArgumentParser(description="write the synthetic fixture dataset")
    parser.add_argument("out_dir")
    parser.add_argument("--tokens", type=int, default=360)
    parser.add_argument("--seed", type=int, default=20231031)
    args = parser.parse_args(argv)
    root = write_fixture(args.out_dir, n_tokens=args.tokens, seed=args.seed)
    print(root)


if __name__ == "__main__":
    main()
