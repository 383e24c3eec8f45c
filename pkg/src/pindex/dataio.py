"""CSV ingestion and JSON/CSV report emission."""

from __future__ import annotations

import csv
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .linalg import Dataset

SCHEMA_VERSION = "1.0"


def ingest_csv(path: str | Path, response: str) -> Dataset:
    """Read a comma-separated file with a header row.

    Every column other than ``response`` becomes a predictor, in file
    order.  Blank lines are skipped.  All malformed rows are reported
    together with their line numbers.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise DataError(f"{path} is not valid UTF-8") from None

    rows = [(i + 1, row) for i, row in enumerate(csv.reader(text.splitlines()))]
    rows = [(ln, row) for ln, row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"{path} is empty")
    _, header = rows[0]
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    if response not in header:
        raise DataError(
            f"{path}: response column {response!r} not found; columns are {', '.join(header)}"
        )
    if len(rows) < 2:
        raise DataError(f"{path} has a header but no data rows")

    problems: list[str] = []
    values: list[list[float]] = []
    width = len(header)
    for ln, row in rows[1:]:
        if len(row) != width:
            problems.append(f"line {ln}: expected {width} fields, found {len(row)}")
            continue
        parsed = []
        bad = []
        for name, cell in zip(header, row):
            try:
                v = float(cell)
            except ValueError:
                bad.append(name)
                continue
            if not math.isfinite(v):
                bad.append(name)
            parsed.append(v)
        if bad:
            problems.append(f"line {ln}: non-numeric value in column(s) {', '.join(bad)}")
            continue
        values.append(parsed)
    if problems:
        raise DataError(f"{path}: " + "; ".join(problems))

    M = np.asarray(values, dtype=float)
    j = header.index(response)
    predictors = [h for h in header if h != response]
    X = np.delete(M, j, axis=1) if predictors else np.empty((M.shape[0], 0))
    return Dataset(M[:, j], X, tuple(predictors))


def write_dataset_csv(dataset: Dataset, path: str | Path, response: str = "y") -> None:
    """Write response and predictors with full float precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([response, *dataset.labels])
        for yi, xi in zip(dataset.y, dataset.X):
            w.writerow([repr(float(yi)), *(repr(float(v)) for v in xi)])


def _sanitize(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def envelope(command: str, config: Mapping, result: Mapping) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": _sanitize(config),
        "result": _sanitize(result),
    }


def dumps(report: Mapping) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, no NaN."""
    return json.dumps(_sanitize(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(report: Mapping, path: str | Path) -> None:
    Path(path).write_text(dumps(report), encoding="utf-8")


def write_rows_csv(rows: Iterable[Mapping], path: str | Path, fields: Sequence[str] | None = None) -> None:
    rows = [_sanitize(r) for r in rows]
    if fields is None:
        fields = list(rows[0]) if rows else []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in fields})


def percentile_rows(series: Mapping[str, Mapping[str, float]], group: str = "") -> list[dict]:
    """Flatten ``{series: {percentile: value}}`` into plot-ready rows."""
    out = []
    for name, table in series.items():
        for q, v in table.items():
            out.append({"group": group, "series": name, "percentile": int(q), "value": v})
    return out


def load_schema() -> dict:
    text = resources.files("pindex").joinpath("schemas/report.schema.json").read_text("utf-8")
    return json.loads(text)


def validate_report(report: Mapping) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` does not conform."""
    import jsonschema

    jsonschema.validate(_sanitize(report), load_schema())
