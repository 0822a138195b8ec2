"""CSV and JSON writers with round-trip number formatting, plus schema lookup."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def fmt(v) -> str:
    """17 significant digits for floats, so the text parses back to the same double."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return ""
    if isinstance(v, Enum):
        return str(v.value)
    return str(v)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
            w.writerow([fmt(v) for v in row])
    return path


def _number(text: str):
    try:
        return float(text)
    except ValueError:
        return None


def read_table(path: str | Path) -> dict[str, np.ndarray]:
    """Columns of a CSV written by :func:`write_csv`.

    Columns whose every cell parses as a number come back as float arrays,
    the rest as arrays of strings.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ValueError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
    out = {}
    for j, name in enumerate(header):
        cells = [r[j] for r in body]
        nums = [_number(c) for c in cells]
        if all(n is not None for n in nums):
            out[name] = np.array(nums, dtype=float)
        elif name in ("genuine", "has_cycle"):
            out[name] = np.array([c == "true" for c in cells])
        else:
            out[name] = np.array(cells, dtype=object)
    return out


def jsonable(obj):
    """Plain JSON types; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_schema(name: str) -> dict:
    """JSON schema shipped with the package, e.g. ``load_schema("manifest")``."""
    text = resources.files("dmlneuron").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
