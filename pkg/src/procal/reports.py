"""CSV and aligned-text rendering of result grids."""
from __future__ import annotations

import csv
import io
from typing import Sequence

from .dataset import format_value


def _cell(v, digits: int | None) -> str:
    if isinstance(v, float):
        return format_value(v) if digits is None else f"{v:.{digits}f}"
    return str(v)


def grid_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v, None) for v in r])
    return buf.getvalue()


def grid_text(header: Sequence[str], rows: Sequence[Sequence], digits: int = 4) -> str:
    cells = [list(header)] + [[_cell(v, digits) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = []
    for k, row in enumerate(cells):
        parts = [c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))]
        lines.append("  ".join(parts).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
