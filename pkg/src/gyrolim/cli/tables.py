"""CSV persistence with fixed headers and 17 significant digits."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path


class CSVFormatError(ValueError):
    pass


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool,)):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return "%.17g" % float(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_csv(path, required=None) -> tuple[list, list]:
    """Header and rows; numeric fields become floats. Raises CSVFormatError naming the file."""
    path = Path(path)
    if not path.is_file():
        raise CSVFormatError(f"{path}: file not found")
    text = path.read_text(encoding="utf-8")
    lines = list(csv.reader(io.StringIO(text)))
    if not lines or not any(cell.strip() for cell in lines[0]):
        raise CSVFormatError(f"{path}: empty CSV")
    header = lines[0]
    if required is not None and list(required) != header[: len(required)]:
        raise CSVFormatError(f"{path}: expected columns {','.join(required)}, got {','.join(header)}")
    rows = []
    for k, raw in enumerate(lines[1:], start=2):
        if not raw:
            continue
        if len(raw) != len(header):
            raise CSVFormatError(f"{path}:{k}: expected {len(header)} fields, got {len(raw)}")
        row = []
        for cell in raw:
            try:
                row.append(float(cell))
            except ValueError:
                row.append(cell)
        rows.append(row)
    if not rows:
        raise CSVFormatError(f"{path}: no data rows")
    return header, rows


def column(header, rows, name) -> list:
    i = header.index(name)
    return [r[i] for r in rows]


def finite(values) -> list:
    return [v for v in values if isinstance(v, float) and math.isfinite(v)]
