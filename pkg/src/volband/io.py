"""CSV ingestion and serialization, config files and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import DataError, VolbandError
from .model import ObservationRecord


def _fmt(x) -> str:
    # repr of a Python float round-trips exactly
    return repr(float(x))


def _parse_date(text: str):
    try:
        return date.fromisoformat(text)
    except ValueError:
        return datetime.fromisoformat(text)


def ingest_csv(path, horizon: float | None = None) -> tuple[ObservationRecord, dict]:
    """Read a ``time,value`` or ``date,value`` CSV into an observation record.

    Numeric times are shifted to start at 0 and rescaled so the last time is
    ``horizon`` (default 1).  ISO-8601 dates are mapped to equidistant
    indices ``i / n`` scaled to ``[0, horizon]``; calendar gaps are ignored.

    Returns the record and a small metadata dict (row count, time kind).
    """
    horizon = 1.0 if horizon is None else float(horizon)
    if not horizon > 0:
        raise DataError(f"horizon must be positive, got {horizon}")
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    header = [c.strip().lower() for c in rows[0]]
    if header not in (["time", "value"], ["date", "value"]):
        raise DataError(f"{path}: header must be 'time,value' or 'date,value', got {rows[0]}")
    kind = header[0]
    body = rows[1:]
    for lineno, row in enumerate(body, start=2):
        if len(row) != 2:
            raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
    if len(body) < 3:
        raise DataError(f"{path}: need at least 3 observations (n >= 2), got {len(body)}")

    try:
        values = np.array([float(r[1]) for r in body])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric value cell ({exc})") from exc
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: values must be finite")

    n = len(body) - 1
    if kind == "time":
        try:
            raw = np.array([float(r[0]) for r in body])
        except ValueError as exc:
            raise DataError(f"{path}: non-numeric time cell ({exc})") from exc
        _check_increasing(raw, path)
        times = (raw - raw[0]) / (raw[-1] - raw[0]) * horizon
        times[-1] = horizon
    else:
        try:
            stamps = [_parse_date(r[0].strip()) for r in body]
        except ValueError as exc:
            raise DataError(f"{path}: unparseable date ({exc})") from exc
        _check_increasing(stamps, path)
        times = np.arange(n + 1) * horizon / n
    try:
        record = ObservationRecord(times, values)
    except VolbandError as exc:
        raise DataError(f"{path}: {exc}") from exc
    return record, {"rows": len(body), "time_column": kind, "equidistant": record.equidistant}


def _check_increasing(stamps, path) -> None:
    for i in range(1, len(stamps)):
        if stamps[i] == stamps[i - 1]:
            raise DataError(f"{path}: duplicate time at data row {i + 1}")
        if stamps[i] < stamps[i - 1]:
            raise DataError(f"{path}: times not increasing at data row {i + 1}")


def write_columns_csv(path, columns: Mapping[str, Iterable]) -> Path:
    """Write equal-length numeric columns with full-precision decimals."""
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[c]).ravel() for c in names]
    if len({d.size for d in data}) > 1:
        raise ValueError("columns differ in length")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*data):
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row])
    return path


def write_observations_csv(path, record: ObservationRecord) -> Path:
    return write_columns_csv(path, {"time": record.times, "value": record.values})


def read_config_file(path) -> dict[str, object]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment.

    Keys use flag names (``bin-width`` or ``bin_width``).  Values with
    internal whitespace become lists (for two-valued flags).
    """
    out: dict[str, object] = {}
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            parts = value.split()
            out[key] = parts if len(parts) > 1 else value
    return out


def file_digest(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, payload: Mapping) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
