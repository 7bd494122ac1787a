"""Deterministic JSON and CSV report emission.

Floats are serialized as their shortest round-trip decimal (``repr``), so
re-parsing a written report reproduces the in-memory float64 values
exactly.  JSON objects are emitted with sorted keys; nothing time- or
host-dependent is ever written, making reports byte-identical across runs
with equal seeds.
"""

import json
from pathlib import Path

import numpy as np

from .attention import MetricReport

CSV_PAIR_HEADER = ("n", "i", "chebyshev", "cosine", "kl", "entropy_orig", "entropy_norm")


def format_value(value) -> str:
    """Shortest exact decimal for floats; plain ``str`` otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def json_text(obj) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def csv_text(header, rows) -> str:
    """CSV text with round-trip float formatting."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def metric_report_dict(report: MetricReport, include_pairs: bool = False) -> dict:
    """JSON-ready view of a shift report.

    Summaries and metadata are always included; ``include_pairs`` adds the
    full per-anchor metric arrays.
    """
    out = {
        "method": report.method,
        "n": report.n,
        "l": report.l,
        "scale_dim": report.scale_dim,
        "directions": dict(report.directions),
        "summaries": report.summaries,
    }
    if include_pairs:
        out["pairs"] = {
            name: report.metric(name).ravel().tolist()
            for name in ("chebyshev", "cosine", "kl", "entropy_original", "entropy_normalized")
        }
    return out


def metric_report_csv(report: MetricReport) -> str:
    """Per-anchor rows ``n,i,chebyshev,cosine,kl,entropy_orig,entropy_norm``."""
    rows = []
    for n in range(report.n):
        for i in range(report.l):
            rows.append(
                (
                    n,
                    i,
                    report.chebyshev[n, i],
                    report.cosine[n, i],
                    report.kl[n, i],
                    report.entropy_original[n, i],
                    report.entropy_normalized[n, i],
                )
            )
    return csv_text(CSV_PAIR_HEADER, rows)
