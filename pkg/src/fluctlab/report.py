"""Deterministic CSV / JSON output for bound reports and pass/fail checks."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .bounds import BoundReport

CSV_COLUMNS = (
    "theorem", "n", "ell", "s", "delta", "alpha", "r", "trials", "seed",
    "bound", "frequency", "wilson_low", "wilson_high", "verdict",
)


@dataclass
class Check:
    """A criterion that is not a bound-vs-frequency comparison (identities, KS, solver accuracy)."""

    name: str
    params: dict
    value: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.value = float(self.value)
        self.tolerance = float(self.tolerance)
        self.passed = bool(self.passed)


def fmt(value) -> str:
    """17 significant digits for floats; ints and strings unchanged."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def _json(obj) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become null."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return _json(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_row(rep: BoundReport) -> list[str]:
    p = rep.params
    emp = rep.empirical
    row = {k: p.get(k, "") for k in ("n", "ell", "s", "delta", "alpha", "r", "trials", "seed")}
    if emp is not None:
        row["trials"] = emp.trials
    row.update(
        theorem=rep.theorem,
        bound=rep.bound_value,
        frequency=emp.frequency if emp else "",
        wilson_low=emp.wilson_low if emp else "",
        wilson_high=emp.wilson_high if emp else "",
        verdict=rep.verdict,
    )
    return [fmt(row[c]) for c in CSV_COLUMNS]


def report_dict(rep: BoundReport) -> dict:
    emp = rep.empirical
    return {
        "theorem": rep.theorem,
        "params": rep.params,
        "bound": rep.bound_value,
        "vacuous": rep.vacuous,
        "empirical": None if emp is None else {
            "frequency": emp.frequency, "trials": emp.trials,
            "wilson_low": emp.wilson_low, "wilson_high": emp.wilson_high,
        },
        "verdict": rep.verdict,
        "notes": rep.notes,
    }


def check_dict(c: Check) -> dict:
    return {"name": c.name, "params": c.params, "value": c.value, "tolerance": c.tolerance,
            "passed": c.passed, "detail": c.detail}


def render_csv(reports: Sequence[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        w.writerow(csv_row(rep))
    return buf.getvalue()


def render_json(reports: Sequence[BoundReport], checks: Sequence[Check] = ()) -> str:
    counts = {v: sum(r.verdict == v for r in reports) for v in ("holds", "holds-vacuously", "violated", "inconclusive")}
    doc = {
        "reports": [report_dict(r) for r in reports],
        "checks": [check_dict(c) for c in checks],
        "summary": {"verdicts": counts, "checks_failed": sum(not c.passed for c in checks)},
    }
    return _json(doc) + "\n"


def emit_report(reports: Sequence[BoundReport], prefix, checks: Iterable[Check] = ()) -> tuple[Path, Path]:
    """Write ``<prefix>.csv`` and ``<prefix>.json``."""
    checks = list(checks)
    if not reports and not checks:
        raise ValueError("nothing to report")
    prefix = Path(prefix)
    csv_path, json_path = prefix.with_name(prefix.name + ".csv"), prefix.with_name(prefix.name + ".json")
    csv_path.write_text(render_csv(reports))
    json_path.write_text(render_json(reports, checks))
    return csv_path, json_path


def exit_code(reports: Sequence[BoundReport], checks: Sequence[Check] = ()) -> int:
    if any(r.verdict == "violated" for r in reports) or any(not c.passed for c in checks):
        return 2
    if any(r.verdict == "inconclusive" for r in reports):
        return 3
    return 0
