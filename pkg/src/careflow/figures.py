"""Matplotlib figure output for reports and dotted charts.

Rendering targets files only (Agg backend); the hand-written SVG in the
event_log module stays the canonical dotted-chart interchange format,
these PNGs are the human-friendly companions dropped next to the
delimited outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .event_log import DottedChartData  # noqa: E402
from .report import ConformanceReport  # noqa: E402

FIRST_COLOR = "#e8711a"
DOT_COLOR = "#3b6fb6"
SYNC_COLOR = "#3b6fb6"
LOG_COLOR = "#e8711a"
MODEL_COLOR = "#b03a3a"

_RC = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path: str) -> None:
    # Drop the library version string so reruns stay byte-identical
    # across environments.
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def dotted_chart_png(data: DottedChartData, path: str, title: str = "Dotted chart") -> None:
    """Scatter of the log: one dot per event, one row per case."""
    with plt.rc_context(_RC):
        height = max(2.5, min(10.0, 1.2 + 0.035 * len(data.rows)))
        fig, ax = plt.subplots(figsize=(9.0, height))
        plain_x, plain_y, first_x, first_y = [], [], [], []
        for row, day, is_first in data.dots:
            (first_x if is_first else plain_x).append(day)
            (first_y if is_first else plain_y).append(row)
        if plain_x:
            ax.scatter(plain_x, plain_y, s=6, color=DOT_COLOR, linewidths=0, label="event")
        if first_x:
            ax.scatter(first_x, first_y, s=8, color=FIRST_COLOR, linewidths=0,
                       label="first event")
        for cutoff in data.cutoffs:
            ax.axvline(cutoff, color="#777777", linestyle="--", linewidth=1)
        ax.set_title(title)
        ax.set_xlabel("date")
        ax.set_ylabel("case (by first event)")
        if data.rows:
            ax.set_ylim(len(data.rows) - 0.5, -0.5)  # first case on top
        if plain_x or first_x:
            ax.legend(loc="lower right", frameon=False)
        fig.autofmt_xdate(rotation=30)
        fig.tight_layout()
        _save(fig, path)


def moves_bar_png(report: ConformanceReport, path: str,
                  title: str = "Moves per activity") -> None:
    """Horizontal stacked bars of sync / log / model moves per activity."""
    rows = list(report.rows)
    with plt.rc_context(_RC):
        height = max(2.0, 0.9 + 0.28 * len(rows))
        fig, ax = plt.subplots(figsize=(8.0, height))
        if rows:
            labels = [r.activity for r in rows][::-1]
            sync = [r.sync_move for r in rows][::-1]
            on_log = [r.move_on_log for r in rows][::-1]
            on_model = [r.move_on_model for r in rows][::-1]
            base_log = sync
            base_model = [s + l for s, l in zip(sync, on_log)]
            ax.barh(labels, sync, color=SYNC_COLOR, label="synchronous")
            ax.barh(labels, on_log, left=base_log, color=LOG_COLOR, label="move on log")
            ax.barh(labels, on_model, left=base_model, color=MODEL_COLOR,
                    label="move on model")
            ax.legend(loc="lower right", frameon=False)
        ax.set_title(title)
        ax.set_xlabel("moves")
        fig.tight_layout()
        _save(fig, path)
