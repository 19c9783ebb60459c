"""
Report documents: JSON on stdout by default, CSV on request
"""

import csv
import json
import math
from typing import IO, Any, Dict, List, Optional, Sequence

import numpy as np

from hus_hill import constants
from hus_hill.dynamics import expected_multipliers, floquet_multipliers
from hus_hill.models import EquationSpec, StabilityReport, Trajectory, TrackingResult, Verdict

TRAJECTORY_COLUMNS = ["index", "t", "psi", "exact", "deviation"]
SWEEP_COLUMNS = [
    "index", "param", "value", "h", "verdict", "argmax_pos", "argmax_neg", "k0_pos", "k0_neg",
    "composite", "selected_sums", "flags", "skipped",
]


def sanitize(value: Any) -> Any:
    """Plain JSON types: numpy scalars unwrapped, non-finite floats as None, complex as [re, im]."""
    if isinstance(value, dict):
        return {str(k): sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [sanitize(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [sanitize(float(value.real)), sanitize(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    return value


def to_json(document: Dict[str, Any]) -> str:
    """
    Serialize a document.

    Floats use Python's shortest round-trip representation, at most 17
    significant digits, so every double reads back unchanged.
    """
    return json.dumps(sanitize(document), indent=2, allow_nan=False)


def format_cell(value: Any) -> str:
    value = sanitize(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, f".{constants.SIG_DIGITS}g")
    if isinstance(value, list):
        return ";".join(format_cell(v) for v in value)
    return str(value)


def write_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: format_cell(row.get(key)) for key in columns})


def emit(document: Dict[str, Any], out: str, stream: IO[str], rows: Optional[List[Dict[str, Any]]] = None,
         columns: Optional[Sequence[str]] = None) -> None:
    """Write a document as JSON, or its rows as CSV (a single summary row when no rows are given)."""
    if out == constants.OUTPUT_CSV:
        if rows is None:
            rows = [document]
            columns = columns or [k for k, v in document.items() if not isinstance(v, (dict, list))]
        write_csv(rows, columns or list(rows[0]), stream)
    else:
        stream.write(to_json(document))
        stream.write("\n")


def analysis_document(report: StabilityReport, spec: Optional[EquationSpec] = None) -> Dict[str, Any]:
    """StabilityReport fields plus the Floquet multipliers of the equation."""
    document = report.to_dict()
    if spec is not None and report.verdict is not Verdict.DEGENERATE:
        document["floquet_multipliers"] = floquet_multipliers(spec)
        document["expected_multipliers"] = expected_multipliers(spec)
    return document


def trajectory_rows(psi: Trajectory, exact: Trajectory) -> List[Dict[str, Any]]:
    deviation = np.abs(psi.samples - exact.samples)
    return [
        {"index": int(k), "t": float(t), "psi": float(a), "exact": float(b), "deviation": float(d)}
        for k, t, a, b, d in zip(psi.indices, psi.times, psi.samples, exact.samples, deviation)
    ]


def tracking_document(
    result: TrackingResult, report: StabilityReport, psi: Trajectory, include_trajectories: bool
) -> Dict[str, Any]:
    document: Dict[str, Any] = {
        "family": report.family.value,
        "cycle": report.cycle.to_dict(),
        "selected_sums": report.selected_sums,
    }
    document.update(result.to_dict())
    if include_trajectories:
        document["trajectories"] = trajectory_rows(psi, result.exact)
    return document


def sweep_flags(report: StabilityReport) -> List[str]:
    """
    Reasons a sweep row sits on or near an excluded value.

    A factor 1 ± hλ_k within UNIT_MODULUS_TOL of zero counts as a zero factor.
    """
    flags: List[str] = []
    pos, neg = report.family.constant_powers
    c = report.cycle
    lam = c.as_array()
    closest = min(
        float(np.min(np.abs(1.0 + sign * c.h * lam))) for sign, power in ((1.0, pos), (-1.0, neg)) if power
    )
    if report.verdict is Verdict.DEGENERATE or closest <= constants.UNIT_MODULUS_TOL:
        flags.append("zero_factor")
    if report.verdict is Verdict.NOT_STABLE:
        flags.append("unit_modulus")
    if pos and report.s_pos is not None and report.s_pos.tie:
        flags.append("argmax_tie_pos")
    if neg and report.s_neg is not None and report.s_neg.tie:
        flags.append("argmax_tie_neg")
    if not report.cycle.is_minimal:
        flags.append("non_minimal_period")
    return flags


def sweep_row(index: int, param: str, value: float, report: StabilityReport) -> Dict[str, Any]:
    flags = sweep_flags(report)
    return {
        "index": index,
        "param": param,
        "value": value,
        "h": report.cycle.h,
        "verdict": report.verdict.value,
        "argmax_pos": report.s_pos.argmax_index if report.s_pos else None,
        "argmax_neg": report.s_neg.argmax_index if report.s_neg else None,
        "k0_pos": report.k0_pos,
        "k0_neg": report.k0_neg,
        "composite": report.composite,
        "selected_sums": report.selected_sums,
        "flags": flags,
        "skipped": bool(flags),
    }
