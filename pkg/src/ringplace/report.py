"""Comparison reports: CSV rows plus an aligned text table.

The text table pivots methods into columns, one row per instance, with the
best (lowest) wirelength per instance starred. Cells without a result show
a dash. The CSV keeps one row per (instance, method) with the reference
wirelength and the achieved/reference ratio when a reference is known.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

from .metrics import MetricsReport

ResultRow = tuple[str, str, "MetricsReport | None", "float | None"]

REPORT_COLUMNS = [
    "instance",
    "method",
    "tewl",
    "overlap_pairs",
    "crossing_count",
    "gt_tewl",
    "tewl_vs_gt_ratio",
    "best",
]

METRICS_COLUMNS = ["name", "method", "tewl", "overlap_pairs", "crossing_count", "seconds"]


def _fmt(value: float) -> str:
    return f"{value:g}"


def _best_keys(results: Sequence[ResultRow]) -> set[tuple[str, str]]:
    """(instance, method) of the lowest-wirelength row per instance.

    Ties keep the first listed row, so exactly one row per instance wins.
    """
    best: dict[str, tuple[str, float]] = {}
    for name, method, metrics, _ in results:
        if metrics is None:
            continue
        if name not in best or metrics.tewl < best[name][1]:
            best[name] = (method, metrics.tewl)
    return {(name, method) for name, (method, _) in best.items()}


def emit_report(results: Sequence[ResultRow]) -> tuple[str, str]:
    """Render results as (CSV text, aligned table text)."""
    if not results:
        raise ValueError("results must be non-empty")
    best = _best_keys(results)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(REPORT_COLUMNS)
    for name, method, metrics, gt in results:
        ratio = ""
        if metrics is not None and gt is not None and gt != 0:
            ratio = f"{metrics.tewl / gt:.3f}"
        writer.writerow(
            [
                name,
                method,
                "" if metrics is None else repr(metrics.tewl),
                "" if metrics is None else metrics.overlap_pairs,
                "" if metrics is None else metrics.crossing_count,
                "" if gt is None else _fmt(gt),
                ratio,
                "*" if (name, method) in best else "",
            ]
        )

    methods: list[str] = []
    instances: list[str] = []
    for name, method, _, _ in results:
        if method not in methods:
            methods.append(method)
        if name not in instances:
            instances.append(name)
    cells: dict[tuple[str, str], str] = {}
    gts: dict[str, float] = {}
    for name, method, metrics, gt in results:
        mark = "*" if (name, method) in best else ""
        cells[(name, method)] = "-" if metrics is None else _fmt(metrics.tewl) + mark
        if gt is not None:
            gts[name] = gt

    headers = ["instance", "gt", *methods]
    rows = [
        [name, _fmt(gts[name]) if name in gts else "-"]
        + [cells.get((name, m), "-") for m in methods]
        for name in instances
    ]
    widths = [
        max(len(headers[c]), *(len(r[c]) for r in rows)) for c in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(headers, widths)))
    ]
    for r in rows:
        lines.append(
            "  ".join(
                v.ljust(w) if i == 0 else v.rjust(w)
                for i, (v, w) in enumerate(zip(r, widths))
            )
        )
    return buf.getvalue(), "\n".join(lines) + "\n"


def metrics_csv_text(
    rows: Iterable[tuple[str, str, MetricsReport, float]]
) -> str:
    """CSV with one row per evaluated placement; seconds is wall-clock."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(METRICS_COLUMNS)
    for name, method, metrics, seconds in rows:
        writer.writerow(
            [
                name,
                method,
                repr(metrics.tewl),
                metrics.overlap_pairs,
                metrics.crossing_count,
                f"{seconds:.3f}",
            ]
        )
    return buf.getvalue()


def save_metrics_csv(
    rows: Iterable[tuple[str, str, MetricsReport, float]], path: str | Path
) -> None:
    Path(path).write_text(metrics_csv_text(rows), encoding="utf-8")
