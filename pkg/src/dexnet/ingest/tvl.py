"""TVL accounting for pools, tokens and the whole market.

All USD amounts are Decimals quantised to 6 fractional digits.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from datetime import date
from decimal import ROUND_HALF_EVEN, Context, Decimal
from typing import Iterable, Sequence

from ..errors import ConfigurationError, DataIntegrityError
from ..model import PairRecord
from .records import PairDaySample, TokenDaySample, TrustedTokenConfig

log = logging.getLogger(__name__)

MICRO = Decimal("0.000001")
ZERO = Decimal("0.000000")
_CTX = Context(prec=80, rounding=ROUND_HALF_EVEN)

CAP_EXCEEDED = "cap-exceeded"
PRICE_DEVIATION = "price-deviation"


def usd(value) -> Decimal:
    return _CTX.quantize(Decimal(value), MICRO)


def _mul(a, b) -> Decimal:
    return usd(_CTX.multiply(Decimal(a), Decimal(b)))


def pool_tvl(price_a, reserve_a, price_b, reserve_b) -> Decimal:
    """Pool value: price_a * reserve_a + price_b * reserve_b."""
    args = [Decimal(x) for x in (price_a, reserve_a, price_b, reserve_b)]
    if any(x < 0 for x in args):
        raise ValueError("prices and reserves must be non-negative")
    return _mul(args[0], args[1]) + _mul(args[2], args[3])


def market_tvl(pool_tvls: Iterable) -> Decimal:
    total = ZERO
    for v in pool_tvls:
        v = usd(v)
        if v < 0:
            raise ValueError("pool TVL must be non-negative")
        total += v
    return total


@dataclass
class OutlierReport:
    kept: list[PairDaySample]
    rejected: list[tuple[PairDaySample, str]]


def _trusted_sides(pair: PairRecord, sample: PairDaySample, config: TrustedTokenConfig):
    sides = []
    if config.is_trusted(pair.token0):
        sides.append((pair.token0, sample.reserve0))
    if config.is_trusted(pair.token1):
        sides.append((pair.token1, sample.reserve1))
    return sides


def filter_outliers(pair_days: Sequence[PairDaySample], pairs: Iterable[PairRecord],
                    config: TrustedTokenConfig) -> OutlierReport:
    """Split pool-day samples into kept and rejected.

    A sample is rejected when
      * neither token is trusted and reserveUSD exceeds the absolute cap
        (``cap-exceeded``), or
      * a trusted token's price implied by the pool, reserveUSD / (2 * reserve),
        differs from its reference price by more than ``deviation_factor`` in
        either direction (``price-deviation``). Skipped when no reference
        price exists for that token and day.
    """
    by_address = {p.pair_address: p for p in pairs}
    kept, rejected = [], []
    factor = config.deviation_factor
    for s in pair_days:
        pair = by_address.get(s.pair_address)
        if pair is None:
            raise DataIntegrityError(f"sample for unknown pair {s.pair_address} on {s.date}")
        sides = _trusted_sides(pair, s, config)
        reason = None
        if not sides:
            if s.reserve_usd > config.outlier_cap_usd:
                reason = CAP_EXCEEDED
        else:
            for token, reserve in sides:
                ref = config.reference_prices.get((token, s.date))
                if ref is None or ref <= 0:
                    continue
                if reserve <= 0:
                    if s.reserve_usd > 0:
                        reason = PRICE_DEVIATION
                        break
                    continue
                implied = _CTX.divide(s.reserve_usd, 2 * reserve)
                ratio = _CTX.divide(implied, ref)
                if ratio > factor or ratio * factor < 1:
                    reason = PRICE_DEVIATION
                    break
        if reason is None:
            kept.append(s)
        else:
            rejected.append((s, reason))
    return OutlierReport(kept, rejected)


@dataclass(frozen=True)
class PoolContribution:
    """Per-pool token values before and after clamping.

    ``kind`` is ``one-trusted``, ``two-trusted`` or ``no-trusted``.
    For one-trusted pools, token0/token1 order is preserved and
    ``trusted_value`` is the anchor P_B * R_B.
    """

    pair_address: str
    kind: str
    pool_tvl: Decimal
    token0: str
    token1: str
    raw0: Decimal
    raw1: Decimal
    trusted_value: Decimal | None = None

    @property
    def value0(self) -> Decimal:
        return max(self.raw0, ZERO)

    @property
    def value1(self) -> Decimal:
        return max(self.raw1, ZERO)

    @property
    def clamped(self) -> bool:
        return self.raw0 < 0 or self.raw1 < 0


def _price_lookup(token_days: Iterable[TokenDaySample]) -> dict[str, Decimal]:
    prices = {}
    for s in token_days:
        prices[s.token_address] = s.price_usd
    return prices


def pool_contributions(pairs: Iterable[PairRecord], pair_days: Sequence[PairDaySample],
                       token_days: Iterable[TokenDaySample], config: TrustedTokenConfig,
                       day: date | None = None) -> list[PoolContribution]:
    """Split every sampled pool's value between its two tokens.

    * exactly one trusted token B: B gets P_B * R_B, the other token gets
      reserveUSD - P_B * R_B (may be negative before clamping);
    * two trusted tokens: each side gets P * R;
    * no trusted token: each side gets reserveUSD / 2.

    Prices are taken from ``token_days``; ``pair_days`` must hold at most one
    sample per pool.
    """
    by_address = {p.pair_address: p for p in pairs}
    prices = _price_lookup(token_days)
    seen = set()
    out = []
    for s in sorted(pair_days, key=lambda s: s.pair_address):
        if s.pair_address in seen:
            raise DataIntegrityError(f"more than one sample for pool {s.pair_address}")
        seen.add(s.pair_address)
        pair = by_address.get(s.pair_address)
        if pair is None:
            raise DataIntegrityError(f"sample for unknown pair {s.pair_address}")
        when = day or s.date

        def price(token):
            p = prices.get(token)
            if p is None:
                raise ConfigurationError(f"no price for trusted token {token} on {when}")
            return p

        total = usd(s.reserve_usd)
        t0 = config.is_trusted(pair.token0)
        t1 = config.is_trusted(pair.token1)
        if t0 and t1:
            v0 = _mul(price(pair.token0), s.reserve0)
            v1 = _mul(price(pair.token1), s.reserve1)
            out.append(PoolContribution(s.pair_address, "two-trusted", total, pair.token0, pair.token1, v0, v1))
        elif t0 or t1:
            if t0:
                anchor = _mul(price(pair.token0), s.reserve0)
                raw0, raw1 = anchor, total - anchor
            else:
                anchor = _mul(price(pair.token1), s.reserve1)
                raw0, raw1 = total - anchor, anchor
            out.append(PoolContribution(s.pair_address, "one-trusted", total, pair.token0, pair.token1,
                                        raw0, raw1, anchor))
        else:
            half = usd(_CTX.divide(total, 2))
            out.append(PoolContribution(s.pair_address, "no-trusted", total, pair.token0, pair.token1,
                                        half, half))
    return out


def reconstruct_token_tvl(pairs: Iterable[PairRecord], pair_days: Sequence[PairDaySample],
                          token_days: Iterable[TokenDaySample], config: TrustedTokenConfig,
                          day: date | None = None) -> dict[str, Decimal]:
    """Token TVL as the sum of its per-pool values (negative values clamped to 0)."""
    contributions = pool_contributions(pairs, pair_days, token_days, config, day)
    totals: dict[str, Decimal] = defaultdict(lambda: ZERO)
    clamped = 0
    for c in contributions:
        totals[c.token0] += c.value0
        totals[c.token1] += c.value1
        clamped += c.clamped
    if clamped:
        log.warning("clamped %d negative pool contribution(s) to zero", clamped)
    return dict(sorted(totals.items()))


def trusted_pool_fraction(pairs: Iterable[PairRecord], config: TrustedTokenConfig) -> tuple[int, int]:
    """(pools with at least one trusted token, all pools)."""
    total = hits = 0
    for p in pairs:
        total += 1
        hits += config.is_trusted(p.token0) or config.is_trusted(p.token1)
    return hits, total


def latest_samples(pair_days: Iterable[PairDaySample], day: date) -> list[PairDaySample]:
    """Most recent sample per pool on or before ``day``."""
    latest: dict[str, PairDaySample] = {}
    for s in pair_days:
        if s.date <= day:
            cur = latest.get(s.pair_address)
            if cur is None or s.date > cur.date:
                latest[s.pair_address] = s
    return [latest[k] for k in sorted(latest)]


def latest_prices(token_days: Iterable[TokenDaySample], day: date) -> list[TokenDaySample]:
    latest: dict[str, TokenDaySample] = {}
    for s in token_days:
        if s.date <= day:
            cur = latest.get(s.token_address)
            if cur is None or s.date > cur.date:
                latest[s.token_address] = s
    return [latest[k] for k in sorted(latest)]


def pool_tvl_map(samples: Iterable[PairDaySample]) -> dict[str, Decimal]:
    return {s.pair_address: usd(s.reserve_usd) for s in samples}


