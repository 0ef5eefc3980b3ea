"""Trace and report files.

A trace CSV starts with one ``# {json}`` header line (config echo, seed,
termination status, counts) followed by the columns in
:data:`TRACE_COLUMNS`.  Floats are written with ``repr`` so files round-trip
exactly and are byte-stable across runs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .solvers import RunTrace

TRACE_COLUMNS = ("t", "kind", "eta", "lambda", "g_value", "loss_index", "objective_value")


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def trace_header(trace: RunTrace) -> dict:
    return {
        "config": trace.config.to_dict(),
        "seed": trace.seed,
        "terminated": trace.terminated.value,
        "T": trace.T,
        "T_J": trace.T_J,
    }


def trace_to_csv(trace: RunTrace) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(trace_header(trace), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for s in trace.steps:
        w.writerow([
            s.t,
            s.kind.value,
            _num(s.eta),
            _num(s.lam),
            _num(s.g_value),
            s.loss_index if s.productive else "",
            _num(s.objective_value),
        ])
    return buf.getvalue()


def write_trace_csv(trace: RunTrace, path) -> None:
    Path(path).write_text(trace_to_csv(trace))


def read_trace_csv(path) -> tuple[dict, list]:
    """Return ``(header, rows)``; numeric columns come back as floats/ints."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# "):
        raise ValueError(f"{path}: missing JSON header line")
    header = json.loads(text[0][2:])
    rows = []
    for r in csv.DictReader(text[1:]):
        rows.append({
            "t": int(r["t"]),
            "kind": r["kind"],
            "eta": float(r["eta"]),
            "lambda": float(r["lambda"]),
            "g_value": float(r["g_value"]),
            "loss_index": int(r["loss_index"]) if r["loss_index"] else None,
            "objective_value": float(r["objective_value"]) if r["objective_value"] else None,
        })
    return header, rows


def write_json(obj_json: str, path) -> None:
    Path(path).write_text(obj_json + "\n")
