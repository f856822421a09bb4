"""Sample files in, records out.

Samples come as CSV (one point per row, one column per dimension, optional
header) or JSON (an array of arrays, or a flat array of scalars). JSON output
writes every float with 17 significant digits.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidSample


def _number(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def parse_csv(text: str, name: str = "<csv>") -> np.ndarray:
    rows = []
    width = None
    for lineno, row in enumerate(csv.reader(_io.StringIO(text)), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        values = [_number(c) for c in cells]
        if any(v is None for v in values):
            if not rows and width is None and all(v is None for v in values):
                width = len(cells)  # header
                continue
            raise InvalidSample(f"{name}: line {lineno}: non-numeric value in {row!r}")
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise InvalidSample(f"{name}: line {lineno}: expected {width} columns, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise InvalidSample(f"{name}: line {lineno}: non-finite value")
        rows.append(values)
    if not rows:
        raise InvalidSample(f"{name}: no data rows")
    return np.array(rows, dtype=np.float64)


def parse_json(text: str, name: str = "<json>") -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSample(f"{name}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, list) or not data:
        raise InvalidSample(f"{name}: expected a non-empty array")
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in data):
        data = [[v] for v in data]
    width = None
    for i, row in enumerate(data):
        if not isinstance(row, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in row
        ):
            raise InvalidSample(f"{name}: element {i} is not an array of numbers")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InvalidSample(f"{name}: element {i} has {len(row)} entries, expected {width}")
    arr = np.array(data, dtype=np.float64)
    if arr.shape[1] == 0 or not np.all(np.isfinite(arr)):
        raise InvalidSample(f"{name}: empty or non-finite points")
    return arr


def load_sample(path) -> np.ndarray:
    """Read a sample file as an (n, D) array, choosing the parser by suffix."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidSample(f"{path}: {exc.strerror}") from exc
    if path.suffix.lower() == ".json":
        return parse_json(text, str(path))
    return parse_csv(text, str(path))


def _encode(obj) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with 17-significant-digit floats; non-finite floats become null."""
    return _encode(obj) + "\n"


def format_real(x: float) -> str:
    return format(float(x), ".17g")


def config_hash(config: dict) -> str:
    """Short SHA-256 of the canonical JSON form of ``config``."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def write_csv(path_or_file, header: list[str], rows) -> None:
    def emit(f):
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_real(v) if isinstance(v, (float, np.floating)) else v for v in row])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as f:
            emit(f)
