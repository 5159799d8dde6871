"""Per-activity deviation tables and their renderings.

A conformance result is condensed into one row per activity label with
three counters: moves on log (observed but not allowed), synchronous
moves (conforming) and moves on model (required but not observed).
Silent moves never appear; they are control-flow bookkeeping. The row
universe is the union of the net's labels and the log's labels, so
guideline activities that never happened and off-guideline activities
both show up.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

from .alignment import LOG, MODEL_VISIBLE, SYNC, ConformanceResult


@dataclass(frozen=True)
class ActivityMoveRow:
    activity: str
    move_on_log: int
    sync_move: int
    move_on_model: int

    def __post_init__(self) -> None:
        if min(self.move_on_log, self.sync_move, self.move_on_model) < 0:
            raise ValueError("move counts must be non-negative")


@dataclass(frozen=True)
class ConformanceReport:
    """Move counts per activity plus the log-level summary numbers."""

    rows: tuple[ActivityMoveRow, ...]
    log_fitness_average: Optional[float]
    log_fitness_cost_based: Optional[float]
    case_count: int
    event_count: int
    variant_count: int


def per_activity_moves(result: ConformanceResult) -> ConformanceReport:
    """Aggregate move counts over all aligned traces.

    Rows are ordered by descending synchronous-move count, then label.
    When every trace aligned, the sums must reproduce the log exactly:
    per activity, move_on_log + sync_move equals the activity's
    occurrence count, and the global sum equals the event total.
    """
    log_moves: dict[str, int] = {}
    sync_moves: dict[str, int] = {}
    model_moves: dict[str, int] = {}
    for _case_id, aln in result.per_trace:
        for m in aln.moves:
            if m.kind == LOG:
                log_moves[m.label] = log_moves.get(m.label, 0) + 1
            elif m.kind == SYNC:
                sync_moves[m.label] = sync_moves.get(m.label, 0) + 1
            elif m.kind == MODEL_VISIBLE:
                model_moves[m.label] = model_moves.get(m.label, 0) + 1

    labels = set(result.net_labels) | set(log_moves) | set(sync_moves) | set(model_moves)
    rows = tuple(
        sorted(
            (
                ActivityMoveRow(
                    label,
                    log_moves.get(label, 0),
                    sync_moves.get(label, 0),
                    model_moves.get(label, 0),
                )
                for label in labels
            ),
            key=lambda r: (-r.sync_move, r.activity),
        )
    )
    if not result.failures:
        observed = sum(r.move_on_log + r.sync_move for r in rows)
        if observed != result.event_count:
            raise ValueError(
                f"bookkeeping violation: {observed} log+sync moves for "
                f"{result.event_count} events"
            )
    return ConformanceReport(
        rows=rows,
        log_fitness_average=result.log_fitness_average,
        log_fitness_cost_based=result.log_fitness_cost_based,
        case_count=result.case_count,
        event_count=result.event_count,
        variant_count=result.variant_count,
    )


def render(report: ConformanceReport, format: str = "csv") -> str:
    """Render the table as csv, markdown, or json (deterministic)."""
    if format == "csv":
        return _render_csv(report)
    if format == "markdown":
        return _render_markdown(report)
    if format == "json":
        return _render_json(report)
    raise ValueError(f"unknown report format {format!r}; use csv, markdown, or json")


def _render_csv(report: ConformanceReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["activity", "move_on_log", "sync_move", "move_on_model"])
    for r in report.rows:
        writer.writerow([r.activity, r.move_on_log, r.sync_move, r.move_on_model])
    return buffer.getvalue()


def _render_markdown(report: ConformanceReport) -> str:
    def cell(text: str) -> str:
        return text.replace("|", "\\|")

    lines = [
        "| Activity | Moves on Log | Synchronous Moves | Moves on Model |",
        "| --- | --- | --- | --- |",
    ]
    for r in report.rows:
        lines.append(
            f"| {cell(r.activity)} | {r.move_on_log} | {r.sync_move} | {r.move_on_model} |"
        )
    return "\n".join(lines) + "\n"


def _render_json(report: ConformanceReport) -> str:
    payload = {
        "rows": [
            {
                "activity": r.activity,
                "move_on_log": r.move_on_log,
                "sync_move": r.sync_move,
                "move_on_model": r.move_on_model,
            }
            for r in report.rows
        ],
        "log_fitness_average": report.log_fitness_average,
        "log_fitness_cost_based": report.log_fitness_cost_based,
        "case_count": report.case_count,
        "event_count": report.event_count,
        "variant_count": report.variant_count,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
