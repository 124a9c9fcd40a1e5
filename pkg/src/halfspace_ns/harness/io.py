"""File formats: CSV with a header row and JSON with sorted keys.

Floats are written with 17 significant digits so every file round-trips
bit-exactly through :func:`read_csv` / :func:`read_json`.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .config import _json_default

PROFILE_COLUMNS = ("x", "rho", "u", "theta", "u_x", "theta_x")
SNAPSHOT_COLUMNS = ("x", "rho", "u", "theta")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    f = float(v)
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    if f == int(f) and abs(f) < 1e15 and not isinstance(v, float):
        return str(int(f))
    return repr(f)


def write_csv(path: str | Path, columns, rows) -> Path:
    """Write ``rows`` (iterables aligned with ``columns``) as comma-separated text."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return p


def write_columns(path, data: dict, columns=None) -> Path:
    columns = tuple(columns or data.keys())
    arrays = [np.asarray(data[c], dtype=float) for c in columns]
    return write_csv(path, columns, zip(*(a.tolist() for a in arrays)))


def _parse(cell: str):
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path) -> tuple[list, list]:
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[_parse(c) for c in row] for row in r]
    return header, rows


def read_columns(path) -> dict:
    """Numeric CSV as a dict of float arrays."""
    header, rows = read_csv(path)
    data = np.array([[np.nan if v is None else float(v) for v in row] for row in rows], dtype=float)
    data = data.reshape(-1, len(header))
    return {h: data[:, i] for i, h in enumerate(header)}


def write_json(path, obj) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n")
    return p


def _clean(obj):
    # JSON has no NaN/inf; store them as strings so files stay standard
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def read_json(path):
    return json.loads(Path(path).read_text())


def write_profile(path, profile) -> Path:
    return write_columns(path, profile.columns(), PROFILE_COLUMNS)


def read_profile(path) -> dict:
    data = read_columns(path)
    missing = set(PROFILE_COLUMNS) - set(data)
    if missing:
        raise ValueError(f"profile file lacks columns {sorted(missing)}")
    return data


def equilibrium_record(params, eq, expansion=None, classification=None) -> dict:
    return {
        "params": params.as_dict(),
        "equilibrium": eq.as_dict(),
        "manifold_coefficients": expansion.as_dict() if expansion is not None else None,
        "classification": classification.as_dict() if classification is not None else None,
    }
