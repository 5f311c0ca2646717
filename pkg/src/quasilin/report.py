"""Check/table reports with byte-deterministic renderers.

Renderers avoid anything environment-dependent: no timestamps, no
hashes, floats through repr (shortest round-trip form). Two runs with
the same inputs and flags must produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

FORMATS = ("text", "json", "csv")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: Optional[float] = None
    tol: Optional[float] = None
    note: str = ""


@dataclass(frozen=True)
class Table:
    title: str
    columns: tuple
    rows: tuple


@dataclass
class Report:
    title: str
    checks: list = field(default_factory=list)
    tables: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self, fmt: str) -> str:
        if fmt == "text":
            return self.render_text()
        if fmt == "json":
            return self.render_json()
        if fmt == "csv":
            return self.render_csv()
        raise ValueError(f"unknown format {fmt!r} (have: {', '.join(FORMATS)})")

    def render_text(self) -> str:
        lines = [self.title]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = ""
            if c.residual is not None:
                extra = f"  residual {_num(c.residual)}"
                if c.tol is not None:
                    extra += f" {'<=' if c.passed else '>'} tol {_num(c.tol)}"
            note = f"  ({c.note})" if c.note else ""
            lines.append(f"[{status}] {c.name}{extra}{note}")
        for t in self.tables:
            lines.append("")
            lines.append(f"table: {t.title}")
            widths = [len(str(h)) for h in t.columns]
            str_rows = [[_cell(v) for v in row] for row in t.rows]
            for row in str_rows:
                for i, s in enumerate(row):
                    widths[i] = max(widths[i], len(s))
            lines.append("  " + "  ".join(str(h).ljust(w) for h, w in zip(t.columns, widths)))
            for row in str_rows:
                lines.append("  " + "  ".join(s.ljust(w) for s, w in zip(row, widths)).rstrip())
        for n in self.notes:
            lines.append(f"note: {n}")
        if self.checks:
            failed = sum(1 for c in self.checks if not c.passed)
            lines.append("")
            lines.append(f"{len(self.checks)} checks, {failed} failed")
        return "\n".join(lines) + "\n"

    def render_json(self) -> str:
        doc = {
            "title": self.title,
            "ok": self.ok,
            "checks": [
                {
                    "name": c.name,
                    "status": "pass" if c.passed else "fail",
                    "residual": c.residual,
                    "tolerance": c.tol,
                    "note": c.note,
                }
                for c in self.checks
            ],
            "tables": [
                {"title": t.title, "columns": list(t.columns), "rows": [list(map(_cell_json, r)) for r in t.rows]}
                for t in self.tables
            ],
            "notes": list(self.notes),
        }
        return json.dumps(doc, indent=2) + "\n"

    def render_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        first = True
        if self.checks:
            w.writerow(("name", "status", "residual", "tolerance", "note"))
            for c in self.checks:
                w.writerow(
                    (
                        c.name,
                        "pass" if c.passed else "fail",
                        "" if c.residual is None else _num(c.residual),
                        "" if c.tol is None else _num(c.tol),
                        c.note,
                    )
                )
            first = False
        for t in self.tables:
            if not first:
                buf.write("\n")
            buf.write(f"# {t.title}\n")
            w.writerow(t.columns)
            for row in t.rows:
                w.writerow([_cell(v) for v in row])
            first = False
        return buf.getvalue()


def _num(v: float) -> str:
    return repr(float(v))


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _num(v)
    if isinstance(v, complex):
        return f"{_num(v.real)}+{_num(v.imag)}j"
    return str(v)


def _cell_json(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v
