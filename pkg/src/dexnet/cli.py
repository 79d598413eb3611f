"""``dexnet`` command-line entry point.

Settings come from flags, then the ``--config`` TOML file, then the
environment (DEXNET_SUBGRAPH_URL / DEXNET_SUBGRAPH_KEY). Exit status is 0 on
success, 1 on a runtime error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections import Counter
from dataclasses import dataclass
from datetime import date
from decimal import Decimal
from pathlib import Path

from . import metrics
from .dynamics import daily_snapshots, evolution_series
from .errors import DexnetError
from .ingest import (
    PROTECTED_TOKENS,
    TRUSTED_TOKENS,
    Dataset,
    SubgraphClient,
    TrustedTokenConfig,
    filter_outliers,
    load_fixture,
    load_reference_prices,
    market_tvl,
    pool_contributions,
    trusted_pool_fraction,
    write_dataset,
)
from .ingest.subgraph import ENV_KEY, ENV_URL
from .ingest.tvl import latest_prices, latest_samples, pool_tvl_map
from .model import LiquidityGraph, build_graph, utc_day
from .powerlaw import fit
from .report import emit_report, write_csv
from .robustness import STRATEGIES, AttackPlan, run_attack_suite
from .seeds import derive_seed

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("dexnet")

REFERENCE_FILE = "reference_prices.csv"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    dataset: Path | None = None
    endpoint: str | None = None
    api_key: str | None = None
    out: Path = Path("out")
    date: date | None = None
    start: date | None = None
    end: date | None = None
    seed: int = 0
    parallelism: int = 1
    strategies: tuple[str, ...] = STRATEGIES
    n_remove: int | None = None
    protected: tuple[str, ...] = PROTECTED_TOKENS
    recompute_ranking: bool = False
    trusted: tuple[str, ...] = TRUSTED_TOKENS
    reference_prices: Path | None = None
    outlier_cap_usd: Decimal = Decimal(10) ** 9
    deviation_factor: Decimal = Decimal(3)
    page_size: int = 1000


# -- configuration --------------------------------------------------------------

def _date(v):
    if isinstance(v, date):
        return v
    try:
        return date.fromisoformat(str(v))
    except ValueError:
        raise UsageError(f"bad date {v!r}; expected YYYY-MM-DD") from None


def _tokens(v):
    items = v.split(",") if isinstance(v, str) else list(v)
    return tuple(t.strip().lower() for t in items if t.strip())


def _strategies(v):
    items = _tokens(v)
    bad = [s for s in items if s not in STRATEGIES]
    if bad:
        raise UsageError(f"unknown strategy {bad[0]!r}; choose from {', '.join(STRATEGIES)}")
    if not items:
        raise UsageError("no strategies given")
    return tuple(dict.fromkeys(items))


def _positive(v):
    v = int(v)
    if v < 1:
        raise UsageError("parallelism must be at least 1")
    return v


def _nonneg(v):
    v = int(v)
    if v < 0:
        raise UsageError("--n must be non-negative")
    return v


# config key -> (RunConfig field, converter)
CONFIG_KEYS = {
    "dataset": ("dataset", Path),
    "endpoint": ("endpoint", str),
    "api_key": ("api_key", str),
    "out": ("out", Path),
    "date": ("date", _date),
    "start": ("start", _date),
    "end": ("end", _date),
    "seed": ("seed", int),
    "parallelism": ("parallelism", _positive),
    "strategies": ("strategies", _strategies),
    "n": ("n_remove", _nonneg),
    "protected": ("protected", _tokens),
    "recompute_ranking": ("recompute_ranking", bool),
    "trusted": ("trusted", _tokens),
    "reference_prices": ("reference_prices", Path),
    "outlier_cap_usd": ("outlier_cap_usd", lambda v: Decimal(str(v))),
    "deviation_factor": ("deviation_factor", lambda v: Decimal(str(v))),
    "page_size": ("page_size", int),
}


def read_config_file(path) -> dict:
    """Flatten a TOML file into RunConfig keys (tables are only for grouping)."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"invalid config file {path}: {exc}") from None
    flat = {}

    def walk(table):
        for k, v in table.items():
            if isinstance(v, dict):
                walk(v)
            elif k in CONFIG_KEYS:
                flat[k] = v
            else:
                raise UsageError(f"unknown config key {k!r} in {path}")

    walk(doc)
    return flat


def resolve_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    layers = [{}, {}, {}]  # env, file, flags; later layers win
    if environ.get(ENV_URL):
        layers[0]["endpoint"] = environ[ENV_URL]
    if environ.get(ENV_KEY):
        layers[0]["api_key"] = environ[ENV_KEY]
    if getattr(args, "config", None):
        layers[1] = read_config_file(args.config)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            layers[2][key] = value

    # the data source is taken from the highest layer that names one
    source = {}
    for layer in reversed(layers):
        named = {k: layer[k] for k in ("dataset", "endpoint") if k in layer}
        if len(named) > 1:
            raise UsageError("give exactly one of --dataset and --endpoint")
        if named:
            source = named
            break

    cfg = RunConfig()
    for layer in layers:
        for key, value in layer.items():
            if key in ("dataset", "endpoint"):
                continue
            name, conv = CONFIG_KEYS[key]
            try:
                setattr(cfg, name, conv(value))
            except (TypeError, ValueError, ArithmeticError) as exc:
                raise UsageError(f"bad value for {key}: {value!r} ({exc})") from None
    for key, value in source.items():
        setattr(cfg, key, CONFIG_KEYS[key][1](value))
    if cfg.dataset is None and cfg.endpoint is None:
        raise UsageError("no data source: give --dataset or --endpoint (or set DEXNET_SUBGRAPH_URL)")
    if cfg.start and cfg.end and cfg.start > cfg.end:
        raise UsageError(f"--start {cfg.start} is after --end {cfg.end}")
    return cfg


# -- data loading ---------------------------------------------------------------

def load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.dataset is not None:
        return load_fixture(cfg.dataset)
    if cfg.start is None or cfg.end is None:
        raise UsageError("fetching from an endpoint needs --start and --end")
    client = SubgraphClient(cfg.endpoint, cfg.api_key, page_size=cfg.page_size,
                            concurrency=cfg.parallelism)
    return client.fetch_dataset(cfg.start, cfg.end)


def trusted_config(cfg: RunConfig) -> TrustedTokenConfig:
    path = cfg.reference_prices
    if path is None and cfg.dataset is not None and (cfg.dataset / REFERENCE_FILE).is_file():
        path = cfg.dataset / REFERENCE_FILE
    ref = load_reference_prices(path) if path is not None else {}
    return TrustedTokenConfig(cfg.trusted, ref, cfg.outlier_cap_usd, cfg.deviation_factor)


def last_day(ds: Dataset) -> date:
    days = [s.date for s in ds.pair_days] + [utc_day(p.created_at) for p in ds.pairs]
    if not days:
        raise DexnetError("dataset is empty")
    return max(days)


@dataclass
class Snapshot:
    graph: LiquidityGraph
    rejected: list
    clamped: int
    trusted_hits: int
    pools: int


def snapshot(ds: Dataset, cfg: RunConfig, day: date) -> Snapshot:
    """Graph as of ``day`` with pool TVL from the latest clean sample and reconstructed token TVL."""
    tcfg = trusted_config(cfg)
    pairs = [p for p in ds.pairs if utc_day(p.created_at) <= day]
    live = {p.pair_address for p in pairs}
    samples = [s for s in latest_samples(ds.pair_days, day) if s.pair_address in live]
    report = filter_outliers(samples, pairs, tcfg)
    contributions = pool_contributions(pairs, report.kept, latest_prices(ds.token_days, day), tcfg, day)
    token_tvl: dict[str, Decimal] = {}
    for c in contributions:
        token_tvl[c.token0] = token_tvl.get(c.token0, Decimal(0)) + c.value0
        token_tvl[c.token1] = token_tvl.get(c.token1, Decimal(0)) + c.value1
    clamped = sum(c.clamped for c in contributions)
    if clamped:
        log.info("clamped %d negative pool contribution(s) to zero", clamped)
    graph = build_graph(pairs, pool_tvl_map(report.kept), token_tvl, ds.tokens, as_of=day)
    hits, total = trusted_pool_fraction(pairs, tcfg)
    return Snapshot(graph, report.rejected, clamped, hits, total)


# -- subcommands ----------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> list[Path]:
    ds = load_dataset(cfg)
    root = write_dataset(ds, cfg.out)
    return [root / n for n in ("pairs.jsonl", "pair_days.jsonl", "token_days.jsonl")]


def cmd_build(cfg: RunConfig, ds: Dataset | None = None) -> list[Path]:
    ds = ds or load_dataset(cfg)
    day = cfg.date or last_day(ds)
    snap = snapshot(ds, cfg, day)
    g = snap.graph
    out = cfg.out
    written = [
        write_csv(out / "nodes.csv", ("token", "symbol", "tvl_usd"),
                  ((v, a.symbol, a.tvl_usd) for v, a in g.nodes.items())),
        write_csv(out / "edges.csv", ("pair", "token0", "token1", "tvl_usd", "created_at"),
                  ((a.pair_address, u, v, a.tvl_usd, a.created_at) for (u, v), a in g.edges.items())),
    ]
    reasons = Counter(r for _, r in snap.rejected)
    written += emit_report({
        "date": day,
        "nodes": g.number_of_nodes(),
        "edges": g.number_of_edges(),
        "market_tvl_usd": market_tvl(a.tvl_usd for a in g.edges.values()),
        "trusted_pools": snap.trusted_hits,
        "pools": snap.pools,
        "trusted_pool_fraction": snap.trusted_hits / snap.pools if snap.pools else 0.0,
        "rejected_samples": dict(sorted(reasons.items())),
        "clamped_contributions": snap.clamped,
    }, "json", out / "graph.json")
    return written


def cmd_stats(cfg: RunConfig, ds: Dataset | None = None) -> list[Path]:
    ds = ds or load_dataset(cfg)
    day = cfg.date or last_day(ds)
    g = snapshot(ds, cfg, day).graph
    if g.number_of_nodes() == 0:
        raise DexnetError(f"no pools exist on or before {day}")
    out = cfg.out
    written = []

    dist = metrics.degree_distribution(g)
    written.append(write_csv(out / "degree_distribution.csv", ("degree", "count"), dist.items()))
    degrees = [d for d in g.degrees().values() if d > 0]
    written += emit_report(fit(degrees, mode="discrete"), "json", out / "fit.json")

    nodes, edges = metrics.betweenness(g, normalized=True, parallelism=cfg.parallelism)
    written += emit_report(nodes, "csv", out / "betweenness_nodes.csv")
    written += emit_report(edges, "csv", out / "betweenness_edges.csv")

    dec = metrics.core_decomposition(g)
    k, core = metrics.max_core_subgraph(g, dec)
    written += emit_report({
        "max_k": k,
        "k_group_sizes": dec.k_group_sizes,
        "kcore_size": core.number_of_nodes(),
        "kcore_edges": core.number_of_edges(),
        "kcore_average_degree": metrics.average_degree(core),
        "kcore_tokens": [{"token": v, "symbol": a.symbol} for v, a in core.nodes.items()],
    }, "json", out / "kcore.json")

    written += emit_report({
        "token_tvl": metrics.gini([a.tvl_usd for a in g.nodes.values()]),
        "pool_tvl": metrics.gini([a.tvl_usd for a in g.edges.values()]),
        "tokens": g.number_of_nodes(),
        "pools": g.number_of_edges(),
    }, "json", out / "gini.json")

    comps = metrics.components(g)
    written += emit_report({
        "count": comps.count,
        "largest": max(comps.sizes),
        "size_counts": dict(sorted(Counter(comps.sizes).items())),
    }, "json", out / "components.json")

    cmp = metrics.core_periphery_comparison(g, derive_seed(cfg.seed, "stats/random_reference"))
    written += emit_report({key: {"observed": o, "random": r} for key, (o, r) in cmp.items()},
                           "json", out / "core_periphery.json")
    return written


def cmd_evolve(cfg: RunConfig, ds: Dataset | None = None) -> list[Path]:
    ds = ds or load_dataset(cfg)
    if not ds.pairs:
        raise DexnetError("dataset has no pools")
    start = cfg.start or min(utc_day(p.created_at) for p in ds.pairs)
    end = cfg.end or cfg.date or last_day(ds)
    if start > end:
        raise UsageError(f"start {start} is after end {end}")
    snaps = daily_snapshots(ds.pairs, start, end, ds.tokens)
    series = evolution_series(snaps, parallelism=cfg.parallelism)
    return emit_report(series, "csv", cfg.out / "evolution.csv")


def cmd_attack(cfg: RunConfig, ds: Dataset | None = None) -> list[Path]:
    ds = ds or load_dataset(cfg)
    day = cfg.date or last_day(ds)
    g = snapshot(ds, cfg, day).graph
    protected = frozenset(cfg.protected)
    available = g.number_of_nodes() - len(protected & g.nodes.keys())
    n = min(1000, available) if cfg.n_remove is None else cfg.n_remove
    plans = [AttackPlan(s, protected, n, derive_seed(cfg.seed, f"attack/{s}"), cfg.recompute_ranking)
             for s in cfg.strategies]
    traces = run_attack_suite(g, plans, parallelism=cfg.parallelism)
    return emit_report(traces, "csv", cfg.out)


def cmd_report(cfg: RunConfig) -> list[Path]:
    """Whole pipeline: build, stats, evolve and attack into subdirectories of --out."""
    ds = load_dataset(cfg)
    root = cfg.out
    written = []
    for name, cmd in (("graph", cmd_build), ("stats", cmd_stats), ("evolution", cmd_evolve),
                      ("attack", cmd_attack)):
        cfg.out = root / name
        written += cmd(cfg, ds)
    cfg.out = root
    return written


COMMANDS = {
    "ingest": cmd_ingest,
    "build": cmd_build,
    "stats": cmd_stats,
    "evolve": cmd_evolve,
    "attack": cmd_attack,
    "report": cmd_report,
}


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("data source")
    src.add_argument("--dataset", help="dataset directory of JSON Lines files")
    src.add_argument("--endpoint", help=f"subgraph GraphQL URL (default ${ENV_URL})")
    src.add_argument("--api-key", dest="api_key", help=f"subgraph API key (default ${ENV_KEY})")
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--out", help="output directory (default out)")
    common.add_argument("--date", help="analysis day YYYY-MM-DD (default: last day in the data)")
    common.add_argument("--start", help="first day YYYY-MM-DD")
    common.add_argument("--end", help="last day YYYY-MM-DD")
    common.add_argument("--seed", type=int, help="top-level random seed (default 0)")
    common.add_argument("--parallelism", type=int, help="worker processes (default 1)")
    common.add_argument("--reference-prices", dest="reference_prices",
                        help=f"reference price CSV (default DATASET/{REFERENCE_FILE} if present)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dexnet", description="Uniswap V2 token network analysis")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    sub.add_parser("ingest", parents=[common], help="fetch or normalise a dataset into --out")
    sub.add_parser("build", parents=[common], help="graph snapshot with TVL as of --date")
    sub.add_parser("stats", parents=[common], help="static metrics as of --date")
    sub.add_parser("evolve", parents=[common], help="daily evolution series over --start..--end")
    for name, text in (("attack", "token-collapse simulation"), ("report", "run the whole pipeline")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--strategies", help=f"comma list from {','.join(STRATEGIES)} (default all)")
        p.add_argument("--n", type=int, help="tokens to remove (default min(1000, available))")
        p.add_argument("--protected", help="comma list of token addresses never removed")
        p.add_argument("--recompute-ranking", dest="recompute_ranking", action="store_true", default=None,
                       help="re-rank after every removal")
    return parser


def run(argv=None, environ=os.environ) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args, environ)
        written = COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dexnet: error: {exc}", file=sys.stderr)
        return 2
    except (DexnetError, OSError, ValueError) as exc:
        print(f"dexnet: {exc}", file=sys.stderr)
        return 1
    for path in written:
        log.info("wrote %s", path)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
