"""CSV / JSON / plain-table rendering of distributions and command output."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .core_model import JointTable, MaxDist, PosDist
from .dyadic import DyadicProb

__all__ = [
    "DIST_COLUMNS",
    "MAX_COLUMNS",
    "Check",
    "OutputEnvelope",
    "joint_rows",
    "position_rows",
    "max_rows",
    "fmt_float",
]

DIST_COLUMNS = ["kind", "n", "x", "a", "numerator", "log2_denominator", "float_value"]
MAX_COLUMNS = ["N", "a", "Q", "route", "numerator", "log2_denominator"]


def fmt_float(v: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(v))


def _prob_fields(p) -> dict[str, Any]:
    if isinstance(p, DyadicProb):
        return {
            "numerator": p.numerator,
            "log2_denominator": p.log2_denominator,
            "float_value": float(p),
        }
    return {"numerator": None, "log2_denominator": None, "float_value": float(p)}


def joint_rows(t: JointTable) -> list[dict[str, Any]]:
    return [
        {"kind": "joint", "n": t.n, "x": x, "a": a, **_prob_fields(p)}
        for (x, a), p in sorted(t.entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    ]


def position_rows(d: PosDist) -> list[dict[str, Any]]:
    return [
        {"kind": "position", "n": d.n, "x": x, "a": None, **_prob_fields(p)}
        for x, p in sorted(d.pmf.items())
    ]


def max_rows(d: MaxDist, route: str | None = None) -> list[dict[str, Any]]:
    route = route or d.route
    rows = []
    for a, p in sorted(d.pmf.items()):
        f = _prob_fields(p)
        rows.append(
            {
                "N": d.n,
                "a": a,
                "Q": f["float_value"],
                "route": route,
                "numerator": f["numerator"],
                "log2_denominator": f["log2_denominator"],
            }
        )
    return rows


@dataclass
class Check:
    name: str
    passed: bool
    measured: Any
    bound: Any

    def __post_init__(self) -> None:
        self.passed = bool(self.passed)
        if isinstance(self.measured, np.generic):
            self.measured = self.measured.item()
        if isinstance(self.bound, np.generic):
            self.bound = self.bound.item()

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured={_cell(self.measured)} bound={_cell(self.bound)}"


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def _jsonable(v: Any) -> Any:
    if isinstance(v, float) and v != v:
        return None
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class OutputEnvelope:
    command: str
    params: dict[str, Any]
    rows: list[dict[str, Any]]
    columns: list[str]
    checks: list[Check] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        return _jsonable(
            {
                "command": self.command,
                "params": self.params,
                "columns": self.columns,
                "rows": [[r.get(c) for c in self.columns] for r in self.rows],
                "checks": [
                    {"name": c.name, "passed": c.passed, "measured": c.measured, "bound": c.bound}
                    for c in self.checks
                ],
                "summary": self.summary,
            }
        )

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2)
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            if not self.columns:
                w.writerow(["check", "passed", "measured", "bound"])
                for c in self.checks:
                    w.writerow([c.name, _cell(c.passed), _cell(c.measured), _cell(c.bound)])
                return buf.getvalue()
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_cell(r.get(c)) for c in self.columns])
            return buf.getvalue()
        if fmt == "table":
            return self._table()
        raise ValueError(f"unknown format {fmt!r}")

    def _table(self) -> str:
        out = [f"# {self.command} " + " ".join(f"{k}={_cell(v)}" for k, v in self.params.items())]
        for k, v in self.summary.items():
            if not isinstance(v, dict):
                out.append(f"# {k} = {_cell(v)}")
        if self.columns:
            cells = [[_cell(r.get(c)) or "-" for c in self.columns] for r in self.rows]
            widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(self.columns)]
            out.append("  ".join(c.rjust(w) for c, w in zip(self.columns, widths)))
            for row in cells:
                out.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
        out.extend(c.line() for c in self.checks)
        return "\n".join(out) + "\n"


def parse_table(text: str) -> tuple[list[str], list[list[str]]]:
    """Read back the column block of a table rendering (used by tests)."""
    lines = [l for l in text.splitlines() if l and not l.startswith("#") and not l.startswith("[")]
    header = lines[0].split()
    return header, [l.split() for l in lines[1:]]


def iter_csv(text: str) -> Iterable[dict[str, str]]:
    return csv.DictReader(io.StringIO(text))
