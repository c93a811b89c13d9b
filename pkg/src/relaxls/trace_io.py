"""Trace export: CSV time series and JSON record arrays."""

import csv
import json
from typing import List

from .scenarios import TraceRecord


def _columns(records: List[TraceRecord]):
    q = len(records[0].theta_hat) if records else 0
    cols = (["t"]
            + [f"theta_hat_{i + 1}" for i in range(q)]
            + [f"theta_err_{i + 1}" for i in range(q)]
            + ["err_norm", "delta", "z", "F_norm", "V"])
    if records and records[0].y is not None:
        cols.append("y")
    if records and records[0].u is not None:
        cols.append("u")
    return cols


def _row(rec: TraceRecord, cols):
    values = [rec.t, *rec.theta_hat, *rec.theta_err,
              rec.err_norm, rec.delta, rec.z, rec.F_norm, rec.V]
    if "y" in cols:
        values.append(rec.y)
    if "u" in cols:
        values.append(rec.u)
    return values


def write_trace(records: List[TraceRecord], fmt: str, path: str):
    """Write records as CSV (17 significant digits) or a JSON array."""
    cols = _columns(records)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for rec in records:
                writer.writerow([f"{v:.17g}" for v in _row(rec, cols)])
    elif fmt == "json":
        payload = [dict(zip(cols, _row(rec, cols))) for rec in records]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown trace format {fmt!r}")


def read_trace_csv(path: str) -> List[TraceRecord]:
    """Reparse a CSV trace back into records (full double precision)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        cols = next(reader)
        q = sum(1 for c in cols if c.startswith("theta_hat_"))
        records = []
        for row in reader:
            vals = dict(zip(cols, (float(v) for v in row)))
            records.append(TraceRecord(
                t=vals["t"],
                theta_hat=tuple(vals[f"theta_hat_{i + 1}"] for i in range(q)),
                theta_err=tuple(vals[f"theta_err_{i + 1}"] for i in range(q)),
                err_norm=vals["err_norm"],
                delta=vals["delta"],
                z=vals["z"],
                F_norm=vals["F_norm"],
                V=vals["V"],
                y=vals.get("y"),
                u=vals.get("u"),
            ))
    return records
