"""
Output storage for nlevel-factor.

Atomic CSV, JSON and matrix-dump writers shared by the CLI and the figure
harness.
"""

from nlevel_factor.storage.writers import (
    SIGNIFICANT_DIGITS,
    atomic_write_text,
    events_sidecar_path,
    format_cell,
    format_float,
    render_matrix_dump,
    to_jsonable,
    write_csv,
    write_json,
)

__all__ = [
    "SIGNIFICANT_DIGITS",
    "atomic_write_text",
    "events_sidecar_path",
    "format_cell",
    "format_float",
    "render_matrix_dump",
    "to_jsonable",
    "write_csv",
    "write_json",
]
