"""CSV / JSON serialisation of analysis results.

Floats are written with 12 significant digits and Decimals as plain
decimal strings, so output files are byte-stable across runs.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import date
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .dynamics import CSV_COLUMNS as EVOLUTION_COLUMNS
from .dynamics import EvolutionSeries, row_values
from .errors import DexnetError
from .metrics import CentralityReport, edge_id
from .powerlaw import FitResult
from .robustness import CSV_COLUMNS as TRACE_COLUMNS
from .robustness import RemovalTrace


class ReportError(DexnetError):
    """An output file could not be written."""


def fmt(value) -> str:
    """Text form of one CSV cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Decimal):
        return format(value, "f")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot serialise non-finite value {value}")
        return f"{value:.12g}"
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def jsonable(value):
    """Recursively convert to JSON-safe types with the same number formatting as CSV."""
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot serialise non-finite value {value}")
        return float(f"{value:.12g}")
    if isinstance(value, (Decimal, date)):
        return fmt(value)
    return value


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    text = json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"
    with _open(path) as fh:
        fh.write(text)
    return path


def _centrality_rows(report: CentralityReport):
    for key, score in report.ranking():
        yield (edge_id(*key) if report.kind == "edge" else key), score


def _trace_rows(strategy: str, trace: RemovalTrace):
    for s in trace.steps:
        yield strategy, s.step, s.removed_token, s.edges_remaining, s.components, s.tvl_lost_fraction


def emit_report(results, format: str, path) -> list[Path]:
    """Write ``results`` to ``path``; returns the files written.

    A ``{strategy: RemovalTrace}`` mapping is written as a directory holding
    ``trace_<strategy>.csv`` per strategy plus the merged ``traces.csv``.
    """
    if format not in ("csv", "json"):
        raise ValueError(f"unknown report format {format!r}")
    path = Path(path)

    if isinstance(results, Mapping) and results and all(isinstance(v, RemovalTrace) for v in results.values()):
        if format != "csv":
            raise ValueError("removal traces are written as CSV")
        written = [write_csv(path / f"trace_{s}.csv", TRACE_COLUMNS, _trace_rows(s, t))
                   for s, t in results.items()]
        merged = (row for s, t in results.items() for row in _trace_rows(s, t))
        written.append(write_csv(path / "traces.csv", TRACE_COLUMNS, merged))
        return written

    if isinstance(results, RemovalTrace):
        strategy = results.plan.strategy if results.plan else ""
        if format == "csv":
            return [write_csv(path, TRACE_COLUMNS, _trace_rows(strategy, results))]
        return [write_json(path, [dict(zip(TRACE_COLUMNS, r)) for r in _trace_rows(strategy, results)])]

    if isinstance(results, CentralityReport):
        if format == "csv":
            return [write_csv(path, ("id", "score"), _centrality_rows(results))]
        return [write_json(path, {"kind": results.kind, "normalized": results.normalized,
                                  "scores": dict(_centrality_rows(results))})]

    if isinstance(results, FitResult):
        d = results.to_dict()
        if format == "csv":
            return [write_csv(path, list(d), [list(d.values())])]
        return [write_json(path, d)]

    if isinstance(results, EvolutionSeries):
        if format == "csv":
            return [write_csv(path, EVOLUTION_COLUMNS, (row_values(r) for r in results))]
        return [write_json(path, [dict(zip(EVOLUTION_COLUMNS, row_values(r))) for r in results])]

    if isinstance(results, (Mapping, list, tuple)):
        if format != "json":
            raise ValueError("plain mappings and lists are written as JSON")
        return [write_json(path, results)]

    raise TypeError(f"no report format for {type(results).__name__}")
