"""Named verification results and the consolidated JSON report.

The JSON report is the package's public wire format (schema 1).  It is
written with sorted keys and fixed separators so that identical (config,
code version) runs produce byte-identical documents in serial mode.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .errors import SchemaError
from .fitting import ExponentFit

REPORT_SCHEMA_VERSION = 1

#: Check classification: exact identities gate the exit status, statistical
#: fits only warn, exploratory checks never affect status.
KIND_EXACT = "exact"
KIND_STATISTICAL = "statistical"
KIND_EXPLORATORY = "exploratory"


@dataclass
class EstimateReport:
    """Outcome of one named verification with full provenance.

    The pass flag is always recomputable from the recorded numbers and
    tolerances.  ``series`` holds the per-sample rows (t, quantity, ratio,
    bound) destined for the check's CSV file; it is not embedded in JSON.
    """

    name: str
    level: int
    kind: str
    parameters: dict
    sup_ratio: float
    passed: bool
    tolerance: float
    violations: int = 0
    fits: list[ExponentFit] = field(default_factory=list)
    notes: str = ""
    series: list[tuple[float, float, float, float]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "check_name": self.name,
            "level": self.level,
            "kind": self.kind,
            "parameters": _plain(self.parameters),
            "sup_ratio": _plain(self.sup_ratio),
            "violations": self.violations,
            "tolerance": _plain(self.tolerance),
            "fits": [f.to_dict() for f in self.fits],
            "pass": bool(self.passed),
            "notes": self.notes,
        }


def _plain(obj):
    """Coerce numpy scalars/containers into strictly valid JSON values.

    Non-finite floats become null: the wire format must parse under strict
    JSON readers, which reject Infinity/NaN literals.
    """
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def consolidated_report(config: dict, code_version: str, solver: dict,
                        checks: Sequence[EstimateReport]) -> dict:
    return {
        "schema": REPORT_SCHEMA_VERSION,
        "code_version": code_version,
        "config": _plain(config),
        "solver": _plain(solver),
        "checks": [c.to_dict() for c in checks],
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":"),
                      allow_nan=False) + "\n"


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fp:
        doc = json.load(fp)
    if doc.get("schema") != REPORT_SCHEMA_VERSION:
        raise SchemaError(f"unsupported report schema {doc.get('schema')!r}")
    return doc


def write_check_csv(path, series: Iterable[tuple[float, float, float, float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fp:
        write_check_csv_fp(fp, series)


def write_check_csv_fp(fp: IO[str], series) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["t", "quantity", "ratio", "bound"])
    for t, quantity, ratio, bound in series:
        writer.writerow([repr(float(t)), repr(float(quantity)),
                         repr(float(ratio)), repr(float(bound))])


def summary_table(checks: Sequence[EstimateReport]) -> str:
    """Human-readable PASS/FAIL table, one line per check."""
    lines = []
    width = max((len(c.name) for c in checks), default=10) + 2
    for c in checks:
        status = "PASS" if c.passed else ("info" if c.kind == KIND_EXPLORATORY else "FAIL")
        extra = f"sup={c.sup_ratio:.4g}" if c.sup_ratio == c.sup_ratio else ""
        if c.fits:
            extra += f"  slope={c.fits[0].slope:+.4f} r2={c.fits[0].r_squared:.4f}"
        lines.append(f"{status:<5} [{c.kind:<11}] {c.name:<{width}} {extra}")
    return "\n".join(lines)
