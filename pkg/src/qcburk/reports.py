"""Structured results and their JSON / CSV serialization.

Every row carries ``check, params, value, bound, est_error, verdict``. JSON
output is deterministic: keys sorted, floats written with ``repr``
precision, no timestamps.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

__all__ = ["QuadratureReport", "InterpolationReport", "verdict_for", "to_json", "to_csv", "jsonable"]

VERDICTS = ("pass", "equality", "fail")


def verdict_for(value: float, bound: float, est_error: float) -> str:
    """``fail`` above ``bound + est``; ``equality`` within ``max(est, 1e-9 |bound|)``; else ``pass``."""
    if not math.isfinite(value):
        return "fail" if value > 0 or math.isnan(value) else "pass"
    slack = bound - value
    if abs(slack) <= max(est_error, 1e-9 * abs(bound)):
        return "equality"
    if value > bound + est_error:
        return "fail"
    return "pass"


def jsonable(x):
    """Recursively convert numpy scalars, complex numbers and tuples for JSON."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, complex):
        return {"re": float(x.real), "im": float(x.imag)}
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


@dataclass
class QuadratureReport:
    check: str
    value: float
    bound: float
    est_error: float
    grid: Dict[str, Any]
    params: Dict[str, Any] = field(default_factory=dict)
    notes: str = ""
    verdict: str = ""

    def __post_init__(self):
        self.value = float(self.value)
        self.bound = float(self.bound)
        self.est_error = float(self.est_error)
        if not self.verdict:
            self.verdict = verdict_for(self.value, self.bound, self.est_error)

    @property
    def slack(self) -> float:
        return self.bound - self.value

    @property
    def ok(self) -> bool:
        return self.verdict in ("pass", "equality")

    def record(self) -> Dict[str, Any]:
        return jsonable({
            "check": self.check,
            "params": self.params,
            "value": self.value,
            "bound": self.bound,
            "slack": self.slack,
            "est_error": self.est_error,
            "verdict": self.verdict,
            "grid": self.grid,
            "notes": self.notes,
        })


@dataclass
class InterpolationReport:
    """Interpolated norms ``M_t`` against the bound ``M0^(1-s) M1^s`` on a grid of ``t``."""

    form: str
    t: List[float]
    p_t: List[float]
    M_t: List[float]
    bounds: List[float]
    M0: float
    M1: float
    tolerance: float
    sampling: Dict[str, Any] = field(default_factory=dict)
    check: str = "interpolation"
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def margins(self) -> List[float]:
        return [b - m for b, m in zip(self.bounds, self.M_t)]

    @property
    def worst_margin(self) -> float:
        return min(self.margins)

    @property
    def verdict(self) -> str:
        w = self.worst_margin
        if w < -self.tolerance:
            return "fail"
        if all(abs(m) <= max(self.tolerance, 1e-12) for m in self.margins):
            return "equality"
        return "pass"

    @property
    def ok(self) -> bool:
        return self.verdict != "fail"

    def record(self) -> Dict[str, Any]:
        worst = min(range(len(self.t)), key=lambda i: self.margins[i])
        return jsonable({
            "check": self.check,
            "params": {**self.params, "form": self.form},
            "value": self.M_t[worst],
            "bound": self.bounds[worst],
            "slack": self.worst_margin,
            "est_error": self.tolerance,
            "verdict": self.verdict,
            "grid": self.sampling,
            "t": self.t,
            "p_t": self.p_t,
            "M_t": self.M_t,
            "bounds": self.bounds,
            "M0": self.M0,
            "M1": self.M1,
        })


def to_json(reports: Iterable, extra: Optional[dict] = None) -> str:
    rows = [r.record() if hasattr(r, "record") else jsonable(r) for r in reports]
    doc = {"reports": rows}
    if extra:
        doc.update(jsonable(extra))
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


CSV_FIELDS = ["check", "params", "value", "bound", "slack", "est_error", "verdict"]


def to_csv(reports: Iterable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        rec = r.record() if hasattr(r, "record") else r
        row = []
        for k in CSV_FIELDS:
            v = rec.get(k, "")
            row.append(json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v)
        w.writerow(row)
    return buf.getvalue()
