"""JSON Lines dataset files and reference-price CSVs.

A dataset directory holds three files, one JSON object per line:

  pairs.jsonl       {"pair", "token0": {"address", "symbol", "name"}, "token1": {...}, "createdAtTimestamp"}
  pair_days.jsonl   {"pair", "date": "YYYY-MM-DD", "reserve0", "reserve1", "reserveUSD"}
  token_days.jsonl  {"token", "date", "priceUSD"}

Numbers are decimal strings so that values round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from datetime import date
from decimal import Decimal
from pathlib import Path
from typing import Iterable

import jsonschema

from ..errors import DataIntegrityError, SchemaError
from ..model import PairRecord, TokenRecord, edge_key
from .records import Dataset, PairDaySample, TokenDaySample

PAIRS_FILE = "pairs.jsonl"
PAIR_DAYS_FILE = "pair_days.jsonl"
TOKEN_DAYS_FILE = "token_days.jsonl"

_ADDRESS = {"type": "string", "pattern": "^0x[0-9a-f]{40}$"}
_DECIMAL = {"type": "string", "pattern": r"^[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?$"}
_DATE = {"type": "string", "pattern": r"^[0-9]{4}-[0-9]{2}-[0-9]{2}$"}
_TOKEN = {
    "type": "object",
    "required": ["address"],
    "properties": {"address": _ADDRESS, "symbol": {"type": "string"}, "name": {"type": "string"}},
}

PAIR_SCHEMA = {
    "type": "object",
    "required": ["pair", "token0", "token1", "createdAtTimestamp"],
    "properties": {
        "pair": _ADDRESS,
        "token0": _TOKEN,
        "token1": _TOKEN,
        "createdAtTimestamp": {
            "oneOf": [{"type": "string", "pattern": "^[0-9]+$"}, {"type": "integer", "minimum": 0}]
        },
    },
}
PAIR_DAY_SCHEMA = {
    "type": "object",
    "required": ["pair", "date", "reserve0", "reserve1", "reserveUSD"],
    "properties": {
        "pair": _ADDRESS,
        "date": _DATE,
        "reserve0": _DECIMAL,
        "reserve1": _DECIMAL,
        "reserveUSD": _DECIMAL,
    },
}
TOKEN_DAY_SCHEMA = {
    "type": "object",
    "required": ["token", "date", "priceUSD"],
    "properties": {"token": _ADDRESS, "date": _DATE, "priceUSD": _DECIMAL},
}


def _read_jsonl(path: Path, schema: dict):
    validator = jsonschema.Draft7Validator(schema)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", lineno, path) from None
            error = jsonschema.exceptions.best_match(validator.iter_errors(obj))
            if error is not None:
                field = "/".join(str(p) for p in error.absolute_path) or "<record>"
                raise SchemaError(f"{field}: {error.message}", lineno, path)
            yield lineno, obj


def _parse_date(text, lineno, path):
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise SchemaError(f"bad date {text!r}", lineno, path) from None


def load_fixture(path) -> Dataset:
    """Load and validate a dataset directory."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {root}")
    files = [root / PAIRS_FILE, root / PAIR_DAYS_FILE, root / TOKEN_DAYS_FILE]
    for f in files:
        if not f.is_file():
            raise FileNotFoundError(f"dataset file missing: {f}")

    pairs, tokens = [], {}
    for lineno, obj in _read_jsonl(files[0], PAIR_SCHEMA):
        t0, t1 = obj["token0"], obj["token1"]
        for t in (t0, t1):
            tokens.setdefault(
                t["address"], TokenRecord(t["address"], t.get("symbol", ""), t.get("name", ""))
            )
        if t0["address"] == t1["address"]:
            raise SchemaError(f"pair {obj['pair']} has token0 == token1", lineno, files[0])
        pairs.append(PairRecord(obj["pair"], t0["address"], t1["address"], int(obj["createdAtTimestamp"])))

    pair_days = [
        PairDaySample(
            obj["pair"],
            _parse_date(obj["date"], lineno, files[1]),
            Decimal(obj["reserve0"]),
            Decimal(obj["reserve1"]),
            Decimal(obj["reserveUSD"]),
        )
        for lineno, obj in _read_jsonl(files[1], PAIR_DAY_SCHEMA)
    ]
    token_days = [
        TokenDaySample(obj["token"], _parse_date(obj["date"], lineno, files[2]), Decimal(obj["priceUSD"]))
        for lineno, obj in _read_jsonl(files[2], TOKEN_DAY_SCHEMA)
    ]
    return normalize_dataset(pairs, pair_days, token_days, tokens)


def normalize_dataset(pairs, pair_days, token_days, tokens) -> Dataset:
    """Check dataset invariants and return records in canonical order."""
    by_address = {}
    by_tokens = {}
    for p in pairs:
        if p.token0 == p.token1:
            raise DataIntegrityError(f"pair {p.pair_address} has token0 == token1")
        if p.pair_address in by_address:
            raise DataIntegrityError(f"duplicate pair address {p.pair_address}")
        by_address[p.pair_address] = p
        key = edge_key(p.token0, p.token1)
        if key in by_tokens:
            raise DataIntegrityError(
                f"pairs {by_tokens[key]} and {p.pair_address} both connect {key[0]} and {key[1]}"
            )
        by_tokens[key] = p.pair_address

    seen = set()
    for s in pair_days:
        if s.pair_address not in by_address:
            raise DataIntegrityError(f"pair-day sample references unknown pair {s.pair_address}")
        if (s.pair_address, s.date) in seen:
            raise DataIntegrityError(f"duplicate pair-day sample ({s.pair_address}, {s.date})")
        seen.add((s.pair_address, s.date))
    seen = set()
    for s in token_days:
        if (s.token_address, s.date) in seen:
            raise DataIntegrityError(f"duplicate token-day sample ({s.token_address}, {s.date})")
        seen.add((s.token_address, s.date))

    return Dataset(
        pairs=sorted(pairs, key=lambda p: p.pair_address),
        pair_days=sorted(pair_days, key=lambda s: (s.pair_address, s.date)),
        token_days=sorted(token_days, key=lambda s: (s.token_address, s.date)),
        tokens=dict(sorted(tokens.items())),
    )


def _num(d: Decimal) -> str:
    return format(d, "f")


def write_dataset(dataset: Dataset, path) -> Path:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    def token(address):
        t = dataset.tokens.get(address) or TokenRecord(address)
        return {"address": t.address, "symbol": t.symbol, "name": t.name}

    def dump(name, rows: Iterable[dict]):
        with open(root / name, "w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(json.dumps(row, separators=(",", ":")) + "\n")

    dump(PAIRS_FILE, (
        {"pair": p.pair_address, "token0": token(p.token0), "token1": token(p.token1),
         "createdAtTimestamp": str(p.created_at)}
        for p in dataset.pairs
    ))
    dump(PAIR_DAYS_FILE, (
        {"pair": s.pair_address, "date": s.date.isoformat(), "reserve0": _num(s.reserve0),
         "reserve1": _num(s.reserve1), "reserveUSD": _num(s.reserve_usd)}
        for s in dataset.pair_days
    ))
    dump(TOKEN_DAYS_FILE, (
        {"token": s.token_address, "date": s.date.isoformat(), "priceUSD": _num(s.price_usd)}
        for s in dataset.token_days
    ))
    return root


def load_reference_prices(path) -> dict[tuple[str, date], Decimal]:
    """Read a ``token_address,date,price_usd`` CSV."""
    prices = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = ["token_address", "date", "price_usd"]
        if reader.fieldnames != expected:
            raise SchemaError(f"expected header {','.join(expected)}", 1, path)
        for lineno, row in enumerate(reader, 2):
            try:
                token = row["token_address"].strip().lower()
                day = date.fromisoformat(row["date"].strip())
                price = Decimal(row["price_usd"].strip())
            except Exception:
                raise SchemaError("unparseable row", lineno, path) from None
            if price < 0 or not price.is_finite():
                raise SchemaError("price must be a non-negative number", lineno, path)
            prices[(token, day)] = price
    return prices
