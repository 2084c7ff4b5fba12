"""Delimited output: CSV with full double precision and LF line endings.

Floats are written with 17 significant digits ('%.17g', '.' decimal
separator), which round-trips IEEE doubles exactly, so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .config import _json_default


def format_cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    value = float(x)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def emit_csv(path, header, rows) -> Path:
    """Write rows (iterables of cells) under the given header."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def emit_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n",
                    newline="\n")
    return path


def read_csv(path):
    """Read back an emitted CSV as (header, list of string rows)."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:] if line]
    return header, rows
