"""CSV and JSON serialization of sweep reports.

Floats are written with 17 significant digits, enough to reproduce every
double exactly. Non-finite numbers are never written: CSV leaves the field
empty and JSON uses ``null``.
"""
import csv
import io
import json
import math
from pathlib import Path

from ..errors import ConicHeatError
from .sweep import COLUMNS, CellSummary, RatioReport, SweepRow

SCHEMA_VERSION = "1"
_INT_COLUMNS = {"d", "excluded_flag"}
_STR_COLUMNS = {"kind", "parity"}


class ReportIOError(ConicHeatError, OSError):
    """Reading or writing a report file failed."""


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, int)):
        return str(int(v))
    return format(v, ".17g") if math.isfinite(v) else ""


def _jnum(v):
    if isinstance(v, float):
        return float(format(v, ".17g")) if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _jnum(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jnum(x) for x in v]
    return v


def _unnum(v):
    return math.nan if v is None else v


def csv_text(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def report_to_dict(report):
    return {
        "schema_version": SCHEMA_VERSION,
        "columns": list(COLUMNS),
        "config": report.config,
        "summary": _jnum(report.summary()),
        "cells": [_jnum(vars(c)) for c in report.cells],
        "rows": [_jnum(list(r)) for r in report.rows],
    }


def report_from_dict(data):
    if str(data.get("schema_version")) != SCHEMA_VERSION:
        raise ReportIOError(f"unsupported schema_version {data.get('schema_version')!r}")
    cells = []
    for c in data["cells"]:
        c = dict(c)
        for k in ("log_min", "log_max", "drift"):
            c[k] = _unnum(c[k])
        cells.append(CellSummary(**c))
    rows = [SweepRow(*(_unnum(v) for v in r)) for r in data["rows"]]
    return RatioReport(data["config"], cells, rows)


def emit(report, fmt, path):
    """Write ``report`` as ``"csv"`` (rows only) or ``"json"`` (everything)."""
    if fmt == "csv":
        text = csv_text(report.rows)
    elif fmt == "json":
        text = json.dumps(report_to_dict(report), indent=1, allow_nan=False) + "\n"
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    path = Path(path)
    try:
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {path}: {exc}") from exc
    return path


def load_report(path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportIOError(f"cannot read report {path}: {exc}") from exc
    return report_from_dict(data)


def read_csv_rows(path):
    """Parse a sweep CSV back into :class:`SweepRow` tuples (empty fields become NaN)."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != COLUMNS:
                raise ReportIOError(f"{path}: unexpected header {header}")
            out = []
            for rec in reader:
                vals = []
                for name, v in zip(COLUMNS, rec):
                    if name in _STR_COLUMNS:
                        vals.append(v)
                    elif name in _INT_COLUMNS:
                        vals.append(int(v))
                    else:
                        vals.append(float(v) if v else math.nan)
                out.append(SweepRow(*vals))
            return out
    except OSError as exc:
        raise ReportIOError(f"cannot read {path}: {exc}") from exc
