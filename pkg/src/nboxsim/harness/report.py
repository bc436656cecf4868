"""Reports and their text, CSV and JSON renderings.

Every table row is ``(label, value, stderr)``. Values are mostly
probabilities; a few diagnostic rows (``refinement_report``) carry booleans
as 0/1 or a commutator norm. Numbers are printed with 12 significant digits
and the output is a pure function of the report, so identical inputs give
byte-identical text.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .. import __version__

__all__ = ["Row", "Table", "Report", "emit_report", "parse_report", "fmt", "CSV_HEADER"]

CSV_HEADER = ("query", "label", "probability", "stderr")
TOOL = "nboxsim"


def fmt(x) -> str:
    """12 significant digits, no negative zero."""
    return format(float(x) + 0.0, ".12g")


def _round(x):
    return None if x is None else float(fmt(x))


@dataclass(frozen=True)
class Row:
    label: str
    value: float
    stderr: float | None = None


@dataclass(frozen=True)
class Table:
    query: str
    rows: tuple[Row, ...]


@dataclass(frozen=True)
class Report:
    experiment: dict
    analytic: tuple[Table, ...]
    empirical: tuple[Table, ...] = ()
    version: str = __version__
    seed: int | None = None
    trials: int | None = None
    meta: dict = field(default_factory=dict)

    def table(self, query, empirical=False) -> Table:
        for t in self.empirical if empirical else self.analytic:
            if t.query == query:
                return t
        raise KeyError(query)

    def values(self, query, empirical=False) -> dict[str, float]:
        return {r.label: r.value for r in self.table(query, empirical).rows}


def emit_report(r: Report, format: str = "text") -> str:
    if format in ("json", "json-like"):
        return _json(r)
    if format == "csv":
        return _csv(r)
    if format == "text":
        return _text(r)
    raise ValueError(f"unknown report format {format!r}")


def _sections(r):
    yield from ((t.query, t) for t in r.analytic)
    yield from ((f"empirical:{t.query}", t) for t in r.empirical)


def _csv(r):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for name, t in _sections(r):
        for row in t.rows:
            w.writerow([name, row.label, fmt(row.value), "" if row.stderr is None else fmt(row.stderr)])
    return buf.getvalue()


def _text(r):
    lines = [f"{TOOL} {r.version}", "experiment: " + json.dumps(r.experiment, separators=(",", ":"))]
    if r.seed is not None:
        lines.append(f"seed: {r.seed}")
        lines.append(f"trials: {r.trials}")
    for name, t in _sections(r):
        lines.append("")
        lines.append(f"[{name}]")
        width = max([len("label")] + [len(row.label) for row in t.rows])
        has_err = any(row.stderr is not None for row in t.rows)
        head = f"  {'label':<{width}}  {'probability':>18}"
        lines.append(head + (f"  {'stderr':>18}" if has_err else ""))
        for row in t.rows:
            line = f"  {row.label:<{width}}  {fmt(row.value):>18}"
            if has_err:
                line += f"  {'-' if row.stderr is None else fmt(row.stderr):>18}"
            lines.append(line)
    return "\n".join(lines) + "\n"


def _table_obj(t):
    return {
        "query": t.query,
        "rows": [
            {"label": row.label, "probability": _round(row.value), "stderr": _round(row.stderr)} for row in t.rows
        ],
    }


def _json(r):
    doc = {
        "tool": TOOL,
        "version": r.version,
        "seed": r.seed,
        "trials": r.trials,
        "experiment": r.experiment,
        "analytic": [_table_obj(t) for t in r.analytic],
        "empirical": [_table_obj(t) for t in r.empirical],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_report(text: str) -> Report:
    """Inverse of the JSON rendering (values come back rounded to 12 digits)."""
    doc = json.loads(text)

    def tables(items):
        return tuple(
            Table(
                t["query"],
                tuple(Row(row["label"], row["probability"], row["stderr"]) for row in t["rows"]),
            )
            for t in items
        )

    return Report(
        experiment=doc["experiment"],
        analytic=tables(doc["analytic"]),
        empirical=tables(doc["empirical"]),
        version=doc["version"],
        seed=doc["seed"],
        trials=doc["trials"],
    )
