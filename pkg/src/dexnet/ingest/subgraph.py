"""Cursor-paginated crawler for the Uniswap V2 subgraph.

Every query orders by ``id`` and asks for ``id_gt`` the last id seen, so
records inserted mid-crawl cannot shift page boundaries.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import date, datetime, timedelta, timezone
from decimal import Decimal, InvalidOperation

import requests

from ..errors import ConfigurationError, DexnetError, ParseError, TransportError
from ..model import PairRecord, TokenRecord, is_address
from .dataset import normalize_dataset
from .records import Dataset, PairDaySample, TokenDaySample

log = logging.getLogger(__name__)

ENV_URL = "DEXNET_SUBGRAPH_URL"
ENV_KEY = "DEXNET_SUBGRAPH_KEY"
MAX_PAGE_SIZE = 1000

PAIRS_QUERY = """
query pairs($first: Int!, $lastId: String!) {
  pairs(first: $first, orderBy: id, orderDirection: asc, where: {id_gt: $lastId}) {
    id
    createdAtTimestamp
    token0 { id symbol name }
    token1 { id symbol name }
  }
}
"""

PAIR_DAY_DATAS_QUERY = """
query pairDayDatas($first: Int!, $lastId: String!, $start: Int!, $end: Int!) {
  pairDayDatas(first: $first, orderBy: id, orderDirection: asc,
               where: {id_gt: $lastId, date_gte: $start, date_lte: $end}) {
    id
    date
    pairAddress
    reserve0
    reserve1
    reserveUSD
  }
}
"""

TOKEN_DAY_DATAS_QUERY = """
query tokenDayDatas($first: Int!, $lastId: String!, $start: Int!, $end: Int!) {
  tokenDayDatas(first: $first, orderBy: id, orderDirection: asc,
                where: {id_gt: $lastId, date_gte: $start, date_lte: $end}) {
    id
    date
    token { id }
    priceUSD
  }
}
"""


def day_timestamp(day: date) -> int:
    return int(datetime(day.year, day.month, day.day, tzinfo=timezone.utc).timestamp())


def _decimal(value, field, record_id):
    try:
        d = Decimal(str(value))
    except (InvalidOperation, TypeError):
        raise ParseError(f"{field} is not a number: {value!r}", record_id) from None
    if not d.is_finite() or d < 0:
        raise ParseError(f"{field} must be a non-negative number, got {value!r}", record_id)
    return d


def _address(value, field, record_id):
    if not isinstance(value, str) or not is_address(value.lower()):
        raise ParseError(f"{field} is not an address: {value!r}", record_id)
    return value.lower()


def parse_pair(rec: dict) -> tuple[PairRecord, TokenRecord, TokenRecord]:
    rid = rec.get("id") if isinstance(rec, dict) else None
    try:
        pair = _address(rec["id"], "id", rid)
        toks = []
        for side in ("token0", "token1"):
            t = rec[side]
            toks.append(TokenRecord(_address(t["id"], f"{side}.id", rid), t.get("symbol") or "", t.get("name") or ""))
        created = int(rec["createdAtTimestamp"])
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed pair record ({exc!r})", rid) from None
    if toks[0].address == toks[1].address:
        raise ParseError("token0 equals token1", rid)
    if created < 0:
        raise ParseError("negative creation timestamp", rid)
    return PairRecord(pair, toks[0].address, toks[1].address, created), toks[0], toks[1]


def parse_pair_day(rec: dict) -> PairDaySample:
    rid = rec.get("id") if isinstance(rec, dict) else None
    try:
        day = datetime.fromtimestamp(int(rec["date"]), tz=timezone.utc).date()
        return PairDaySample(
            _address(rec["pairAddress"], "pairAddress", rid),
            day,
            _decimal(rec["reserve0"], "reserve0", rid),
            _decimal(rec["reserve1"], "reserve1", rid),
            _decimal(rec["reserveUSD"], "reserveUSD", rid),
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, OverflowError) as exc:
        raise ParseError(f"malformed pairDayData record ({exc!r})", rid) from None


def parse_token_day(rec: dict) -> TokenDaySample:
    rid = rec.get("id") if isinstance(rec, dict) else None
    try:
        day = datetime.fromtimestamp(int(rec["date"]), tz=timezone.utc).date()
        return TokenDaySample(
            _address(rec["token"]["id"], "token.id", rid), day, _decimal(rec["priceUSD"], "priceUSD", rid)
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, OverflowError) as exc:
        raise ParseError(f"malformed tokenDayData record ({exc!r})", rid) from None


def _split_range(start: date, end: date, parts: int):
    days = (end - start).days + 1
    parts = max(1, min(parts, days))
    step = -(-days // parts)
    out = []
    cur = start
    while cur <= end:
        stop = min(cur + timedelta(days=step - 1), end)
        out.append((cur, stop))
        cur = stop + timedelta(days=1)
    return out


class SubgraphClient:
    """HTTP client for the subgraph's GraphQL endpoint.

    ``duplicates_dropped`` counts repeated (pool, date) / (token, date) rows
    discarded by the day-data fetchers; the last-fetched row wins.
    """

    def __init__(self, endpoint=None, api_key=None, page_size=MAX_PAGE_SIZE, concurrency=4,
                 retries=3, backoff=0.5, timeout=60.0, session=None):
        endpoint = endpoint or os.environ.get(ENV_URL)
        if not endpoint:
            raise ConfigurationError(f"no subgraph endpoint configured (set {ENV_URL})")
        if not 1 <= page_size <= MAX_PAGE_SIZE:
            raise ValueError(f"page size must be in [1, {MAX_PAGE_SIZE}]")
        if concurrency < 1 or retries < 1:
            raise ValueError("concurrency and retries must be at least 1")
        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_KEY)
        self.page_size = page_size
        self.concurrency = concurrency
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()
        self.requests_made = 0
        self.duplicates_dropped = 0

    def _post(self, query, variables):
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last = None
        for attempt in range(1, self.retries + 1):
            self.requests_made += 1
            try:
                resp = self.session.post(self.endpoint, json={"query": query, "variables": variables},
                                         headers=headers, timeout=self.timeout)
                if resp.status_code == 429 or resp.status_code >= 500:
                    last = f"HTTP {resp.status_code}"
                else:
                    resp.raise_for_status()
                    body = resp.json()
                    if body.get("errors"):
                        raise DexnetError(f"subgraph returned errors: {body['errors']}")
                    return body["data"]
            except requests.RequestException as exc:
                last = repr(exc)
            if attempt < self.retries:
                time.sleep(self.backoff * 2 ** (attempt - 1))
        raise TransportError(f"request to {self.endpoint} failed: {last}", self.retries)

    def _paginate(self, query, root, extra=None):
        last_id = ""
        while True:
            variables = {"first": self.page_size, "lastId": last_id, **(extra or {})}
            page = self._post(query, variables)[root]
            yield from page
            if len(page) < self.page_size:
                return
            last_id = page[-1]["id"]

    def fetch_pairs(self) -> tuple[list[PairRecord], dict[str, TokenRecord]]:
        pairs, tokens = [], {}
        for rec in self._paginate(PAIRS_QUERY, "pairs"):
            pair, t0, t1 = parse_pair(rec)
            pairs.append(pair)
            tokens.setdefault(t0.address, t0)
            tokens.setdefault(t1.address, t1)
        pairs.sort(key=lambda p: p.pair_address)
        return pairs, dict(sorted(tokens.items()))

    def _fetch_windows(self, query, root, parse, key, start, end):
        if start > end:
            raise ValueError(f"empty date range: {start} > {end}")
        windows = _split_range(start, end, self.concurrency)

        def crawl(window):
            lo, hi = window
            extra = {"start": day_timestamp(lo), "end": day_timestamp(hi)}
            return [parse(r) for r in self._paginate(query, root, extra)]

        if len(windows) > 1:
            with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
                results = list(pool.map(crawl, windows))
        else:
            results = [crawl(windows[0])]
        merged = {}
        dropped = 0
        for rows in results:
            for row in rows:
                k = key(row)
                if k in merged:
                    dropped += 1
                merged[k] = row
        if dropped:
            log.warning("dropped %d duplicate %s row(s)", dropped, root)
            self.duplicates_dropped += dropped
        return [merged[k] for k in sorted(merged)]

    def fetch_pair_day_data(self, start: date, end: date) -> list[PairDaySample]:
        return self._fetch_windows(PAIR_DAY_DATAS_QUERY, "pairDayDatas", parse_pair_day,
                                   lambda s: (s.pair_address, s.date), start, end)

    def fetch_token_day_data(self, start: date, end: date) -> list[TokenDaySample]:
        return self._fetch_windows(TOKEN_DAY_DATAS_QUERY, "tokenDayDatas", parse_token_day,
                                   lambda s: (s.token_address, s.date), start, end)

    def fetch_dataset(self, start: date, end: date) -> Dataset:
        pairs, tokens = self.fetch_pairs()
        known = {p.pair_address for p in pairs}
        pair_days = [s for s in self.fetch_pair_day_data(start, end) if s.pair_address in known]
        token_days = self.fetch_token_day_data(start, end)
        return normalize_dataset(pairs, pair_days, token_days, tokens)


def fetch_pairs(endpoint, page_size=MAX_PAGE_SIZE, **kwargs) -> list[PairRecord]:
    return SubgraphClient(endpoint, page_size=page_size, **kwargs).fetch_pairs()[0]


def fetch_pair_day_data(endpoint, date_range, page_size=MAX_PAGE_SIZE, **kwargs) -> list[PairDaySample]:
    return SubgraphClient(endpoint, page_size=page_size, **kwargs).fetch_pair_day_data(*date_range)


def fetch_token_day_data(endpoint, date_range, page_size=MAX_PAGE_SIZE, **kwargs) -> list[TokenDaySample]:
    return SubgraphClient(endpoint, page_size=page_size, **kwargs).fetch_token_day_data(*date_range)
