"""Deterministic CSV emission for command-line outputs.

Plain RFC 4180: comma separated, LF line endings, a single header row.
Floats are written with repr-faithful precision ('%.17g') so that reruns of
the same command produce byte-identical files.
"""

from __future__ import annotations

import io
from collections.abc import Iterable, Mapping


def _format(value) -> str:
    if isinstance(value, float):
        return "%.17g" % value
    if isinstance(value, str):
        if any(c in value for c in ',"\n'):
            return '"' + value.replace('"', '""') + '"'
        return value
    return str(value)


def emit_csv(rows: Iterable[Mapping], header: list[str] | None = None) -> str:
    """Render rows (mappings with identical keys) as a CSV string."""
    buf = io.StringIO()
    first = True
    for row in rows:
        if first:
            if header is None:
                header = list(row.keys())
            buf.write(",".join(header) + "\n")
            first = False
        buf.write(",".join(_format(row[k]) for k in header) + "\n")
    if first and header is not None:
        buf.write(",".join(header) + "\n")
    return buf.getvalue()


def write_csv(path: str, rows: Iterable[Mapping],
              header: list[str] | None = None) -> None:
    text = emit_csv(rows, header)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
