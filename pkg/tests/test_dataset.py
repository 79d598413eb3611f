import json
import shutil
from datetime import date
from decimal import Decimal

import pytest

from dexnet.errors import DataIntegrityError, SchemaError
from dexnet.ingest import load_fixture, load_reference_prices, normalize_dataset, write_dataset
from dexnet.ingest.records import PairDaySample, TokenDaySample
from dexnet.model import PairRecord


def copy_fixture(src, tmp_path):
    dst = tmp_path / "ds"
    shutil.copytree(src, dst)
    return dst


def test_fixture_loads(fixture_dir):
    ds = load_fixture(fixture_dir)
    assert 450 <= len(ds.pairs) <= 550
    assert len(ds.tokens) == len({t for p in ds.pairs for t in (p.token0, p.token1)})
    assert ds.pairs == sorted(ds.pairs, key=lambda p: p.pair_address)


def test_round_trip(fixture_dir, tmp_path):
    ds = load_fixture(fixture_dir)
    write_dataset(ds, tmp_path / "out")
    assert load_fixture(tmp_path / "out") == ds
    for name in ("pairs.jsonl", "pair_days.jsonl", "token_days.jsonl"):
        assert (tmp_path / "out" / name).read_bytes() == (fixture_dir / name).read_bytes()


def test_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_fixture(tmp_path / "nope")


def test_missing_file(fixture_dir, tmp_path):
    d = copy_fixture(fixture_dir, tmp_path)
    (d / "token_days.jsonl").unlink()
    with pytest.raises(FileNotFoundError):
        load_fixture(d)


def _rewrite_line(path, lineno, mutate):
    lines = path.read_text().splitlines()
    obj = json.loads(lines[lineno - 1])
    mutate(obj)
    lines[lineno - 1] = json.dumps(obj)
    path.write_text("\n".join(lines) + "\n")


def test_negative_reserve_is_schema_error_with_line(fixture_dir, tmp_path):
    d = copy_fixture(fixture_dir, tmp_path)
    _rewrite_line(d / "pair_days.jsonl", 5, lambda o: o.update(reserve0="-1.0"))
    with pytest.raises(SchemaError) as info:
        load_fixture(d)
    assert info.value.line == 5


def test_bad_json_line(fixture_dir, tmp_path):
    d = copy_fixture(fixture_dir, tmp_path)
    with open(d / "token_days.jsonl", "a") as fh:
        fh.write("{not json\n")
    with pytest.raises(SchemaError):
        load_fixture(d)


def test_duplicate_pair_line(fixture_dir, tmp_path):
    d = copy_fixture(fixture_dir, tmp_path)
    first = (d / "pairs.jsonl").read_text().splitlines()[0]
    with open(d / "pairs.jsonl", "a") as fh:
        fh.write(first + "\n")
    with pytest.raises(DataIntegrityError):
        load_fixture(d)


A, B, C = ("0x" + c * 40 for c in "abc")


def test_normalize_rejects_unordered_duplicate():
    pairs = [PairRecord("0x" + "1" * 40, A, B, 0), PairRecord("0x" + "2" * 40, B, A, 0)]
    with pytest.raises(DataIntegrityError):
        normalize_dataset(pairs, [], [], {})


def test_normalize_rejects_unknown_pair_sample():
    s = PairDaySample("0x" + "9" * 40, date(2023, 1, 1), Decimal(1), Decimal(1), Decimal(1))
    with pytest.raises(DataIntegrityError):
        normalize_dataset([], [s], [], {})


def test_normalize_rejects_duplicate_token_day():
    s = TokenDaySample(A, date(2023, 1, 1), Decimal(1))
    with pytest.raises(DataIntegrityError):
        normalize_dataset([], [], [s, s], {})


def test_reference_prices(fixture_dir, tmp_path):
    ref = load_reference_prices(fixture_dir / "reference_prices.csv")
    assert all(isinstance(v, Decimal) and v > 0 for v in ref.values())
    bad = tmp_path / "ref.csv"
    bad.write_text("token,date,price\n")
    with pytest.raises(SchemaError):
        load_reference_prices(bad)
