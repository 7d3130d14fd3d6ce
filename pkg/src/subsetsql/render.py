"""Deterministic result rendering: aligned tables, CSV, and JSON."""

from __future__ import annotations

import csv
import io
import json

from .engine import QueryResult
from .values import Dec, render_value


def render(result: QueryResult, fmt: str = "table") -> str:
    if fmt == "table":
        return _render_table(result)
    if fmt == "csv":
        return _render_csv(result)
    if fmt == "json":
        return _render_json(result)
    raise ValueError(f"unknown output format {fmt!r}")


def _cell(v) -> str:
    return render_value(v)


def _render_table(result: QueryResult) -> str:
    header = result.columns
    rows = [[_cell(v) for v in row] for row in result.rows]
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        " | ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip(),
        "-+-".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append(" | ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return "\n".join(lines)


def _render_csv(result: QueryResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue().rstrip("\n")


def _json_value(v):
    if isinstance(v, Dec):
        return v.render()  # exact decimal text, never a float
    return v


def _render_json(result: QueryResult) -> str:
    if result.kind == "members":
        payload = {
            "subsets": [
                {"sid": sid, "rows": [[_json_value(v) for v in row] for row in rows]}
                for sid, rows in (result.subset_groups or [])
            ]
        }
    else:
        payload = [[_json_value(v) for v in row] for row in result.rows]
    return json.dumps(payload, ensure_ascii=False)
