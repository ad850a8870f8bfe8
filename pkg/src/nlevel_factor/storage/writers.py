"""
Atomic file output for sweeps, reports and matrix dumps.

Every writer renders the full payload in memory, writes it to a temporary
sibling file and renames it over the target, so readers never observe a
partially written file.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


def format_float(value: float) -> str:
    """Locale-independent float with 12 significant digits."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.{SIGNIFICANT_DIGITS}g}"
    return "0" if text == "-0" else text


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return str(value)


def atomic_write_text(path: str | Path, content: str) -> Path:
    """Write text through a temporary file and rename it into place."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    temp_path = target.with_name(f".{target.name}.tmp")
    try:
        with open(temp_path, "w", encoding="utf-8", newline="") as f:
            f.write(content)
        temp_path.replace(target)
    except Exception:
        temp_path.unlink(missing_ok=True)
        raise
    logger.debug("wrote %s (%d bytes)", target, len(content))
    return target


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV with a header row; floats use 12 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"CSV row has {len(row)} cells, header has {len(header)}")
        writer.writerow([format_cell(cell) for cell in row])
    return atomic_write_text(path, buffer.getvalue())


def to_jsonable(value: Any) -> Any:
    """Convert numpy containers and scalars to plain JSON types."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def write_json(path: str | Path, payload: Any) -> Path:
    """Write indented, key-sorted JSON."""
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n"
    return atomic_write_text(path, text)


def events_sidecar_path(csv_path: str | Path) -> Path:
    """Path of the `<out>.events.json` sidecar next to a sweep CSV."""
    path = Path(csv_path)
    return path.with_name(f"{path.name}.events.json")


def render_matrix_dump(data: np.ndarray, *, threshold: float = 0.0) -> str:
    """Text dump: the dimension, then 1-based `row col value` for each nonzero entry."""
    lines = [str(data.shape[0])]
    rows, cols = np.nonzero(np.abs(data) > threshold)
    lines.extend(f"{r + 1} {c + 1} {format_float(data[r, c])}" for r, c in zip(rows, cols))
    return "\n".join(lines) + "\n"
