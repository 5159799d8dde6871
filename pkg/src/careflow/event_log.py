"""Event log model and preprocessing.

An event log is a collection of traces (one per case), each trace an ordered
sequence of day-granular events. Ordering inside a trace is by (date, source
position); the source position keeps same-day events in the order they were
recorded, which is the only reproducible tie-breaker at day granularity.
"""

from __future__ import annotations

import csv
import logging
import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import IO, Iterable, Mapping, Optional, Sequence

log = logging.getLogger(__name__)

DEFAULT_CASE_COL = "case_id"
DEFAULT_ACTIVITY_COL = "activity"
DEFAULT_DATE_COL = "timestamp"
DEFAULT_DATE_FORMAT = "%Y-%m-%d"

XES_ACTIVITY_KEY = "concept:name"
XES_TIMESTAMP_KEY = "time:timestamp"


class LogSchemaError(ValueError):
    """Input file does not match the expected column / attribute schema."""


class LogRowError(ValueError):
    """A single data row is malformed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Event:
    case_id: str
    activity: str
    timestamp: date
    source_index: int

    def __post_init__(self):
        if not self.activity:
            raise ValueError("event activity must be non-empty")
        if not isinstance(self.timestamp, date):
            raise TypeError("event timestamp must be a calendar date")


@dataclass(frozen=True)
class Trace:
    """Events of one case, sorted by (timestamp, source_index)."""

    case_id: str
    events: tuple[Event, ...]

    def __post_init__(self):
        for e in self.events:
            if e.case_id != self.case_id:
                raise ValueError(
                    f"event case id {e.case_id!r} differs from trace {self.case_id!r}"
                )
        ordered = tuple(sorted(self.events, key=lambda e: (e.timestamp, e.source_index)))
        object.__setattr__(self, "events", ordered)

    def __len__(self) -> int:
        return len(self.events)

    @property
    def activities(self) -> tuple[str, ...]:
        return tuple(e.activity for e in self.events)

    @property
    def first_date(self) -> date:
        return self.events[0].timestamp

    @property
    def last_date(self) -> date:
        return self.events[-1].timestamp


@dataclass(frozen=True)
class EventLog:
    """Traces keyed by case id; immutable, operations return new logs."""

    traces: Mapping[str, Trace]
    name: str = "log"

    def __post_init__(self):
        object.__setattr__(self, "traces", dict(self.traces))
        for cid, tr in self.traces.items():
            if cid != tr.case_id:
                raise ValueError(f"trace keyed {cid!r} has case id {tr.case_id!r}")

    @classmethod
    def from_traces(cls, traces: Iterable[Trace], name: str = "log") -> "EventLog":
        by_case: dict[str, Trace] = {}
        for tr in traces:
            if tr.case_id in by_case:
                raise ValueError(f"duplicate case id {tr.case_id!r}")
            by_case[tr.case_id] = tr
        return cls(by_case, name)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces.values())

    @property
    def case_count(self) -> int:
        return len(self.traces)

    @property
    def event_count(self) -> int:
        return sum(len(t) for t in self.traces.values())

    @property
    def activity_labels(self) -> set[str]:
        return {e.activity for t in self for e in t.events}


@dataclass(frozen=True)
class Variant:
    activities: tuple[str, ...]
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("variant multiplicity must be >= 1")


@dataclass(frozen=True)
class WaveBoundaries:
    """Ascending cutoff dates; k cutoffs partition a log into k+1 buckets."""

    cutoffs: tuple[date, ...]

    def __post_init__(self):
        for a, b in zip(self.cutoffs, self.cutoffs[1:]):
            if a >= b:
                raise ValueError("wave cutoffs must be strictly ascending")


# ---------------------------------------------------------------------------
# parsing


def parse_csv(
    stream: IO[str],
    mapping: tuple[str, str, str] = (DEFAULT_CASE_COL, DEFAULT_ACTIVITY_COL, DEFAULT_DATE_COL),
    date_format: str = DEFAULT_DATE_FORMAT,
    name: str = "log",
) -> EventLog:
    """Read a header-bearing delimited file into an event log.

    `mapping` names the case / activity / date columns. Rows are grouped by
    case id; the row order of the file becomes the source index used to break
    same-day ties.
    """
    case_col, act_col, date_col = mapping
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise LogSchemaError("input has no header row")
    for col in (case_col, act_col, date_col):
        if col not in reader.fieldnames:
            raise LogSchemaError(f"missing column {col!r} (header: {reader.fieldnames})")

    events_by_case: dict[str, list[Event]] = {}
    for idx, row in enumerate(reader):
        line = idx + 2  # 1-based, after the header
        raw_date = (row.get(date_col) or "").strip()
        try:
            ts = datetime.strptime(raw_date, date_format).date()
        except ValueError as exc:
            raise LogRowError(line, f"cannot parse date {raw_date!r}: {exc}") from exc
        case_id = (row.get(case_col) or "").strip()
        activity = (row.get(act_col) or "").strip()
        if not case_id:
            raise LogRowError(line, "empty case id")
        if not activity:
            raise LogRowError(line, "empty activity")
        events_by_case.setdefault(case_id, []).append(
            Event(case_id, activity, ts, source_index=idx)
        )

    traces = [Trace(cid, tuple(evs)) for cid, evs in events_by_case.items()]
    return EventLog.from_traces(traces, name=name)


def _xes_local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_xes_timestamp(value: str) -> date:
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        return datetime.fromisoformat(text).date()
    except ValueError:
        return date.fromisoformat(text[:10])


def parse_xes(stream: IO, name: str = "log") -> EventLog:
    """Read the string/date subset of the XES vocabulary into an event log.

    Only `concept:name` (trace id and activity) and `time:timestamp` are
    interpreted; timestamps are truncated to day granularity.
    """
    try:
        tree = ET.parse(stream)
    except ET.ParseError as exc:
        raise LogSchemaError(f"malformed XES XML: {exc}") from exc

    root = tree.getroot()
    traces: list[Trace] = []
    seen: set[str] = set()
    source_index = 0
    for ti, trace_el in enumerate(e for e in root.iter() if _xes_local(e.tag) == "trace"):
        case_id = None
        events: list[tuple[str, date]] = []
        for child in trace_el:
            tag = _xes_local(child.tag)
            if tag == "string" and child.get("key") == XES_ACTIVITY_KEY:
                case_id = child.get("value")
            elif tag == "event":
                activity = None
                ts: Optional[date] = None
                for attr in child:
                    key = attr.get("key")
                    if key == XES_ACTIVITY_KEY:
                        activity = attr.get("value")
                    elif key == XES_TIMESTAMP_KEY:
                        ts = _parse_xes_timestamp(attr.get("value", ""))
                if not activity:
                    raise LogRowError(ti + 1, f"trace {case_id!r}: event lacks {XES_ACTIVITY_KEY}")
                if ts is None:
                    raise LogRowError(ti + 1, f"trace {case_id!r}: event lacks {XES_TIMESTAMP_KEY}")
                events.append((activity.strip(), ts))
        if case_id is None:
            case_id = f"trace_{ti}"
        case_id = case_id.strip()
        if case_id in seen:
            raise LogSchemaError(f"duplicate case id {case_id!r} at trace level")
        seen.add(case_id)
        evs = []
        for activity, ts in events:
            evs.append(Event(case_id, activity, ts, source_index))
            source_index += 1
        traces.append(Trace(case_id, tuple(evs)))
    return EventLog.from_traces(traces, name=name)


# ---------------------------------------------------------------------------
# preprocessing


def trace_duration_days(trace: Trace) -> int:
    """Whole days between the first and last event of a non-empty trace."""
    if not trace.events:
        raise ValueError("trace is empty")
    return (trace.last_date - trace.first_date).days


def average_duration_days(log_: EventLog) -> float:
    """Arithmetic mean of trace durations, in days."""
    if not log_.traces:
        raise ValueError("log is empty")
    return sum(trace_duration_days(t) for t in log_) / len(log_)


def remove_duration_outliers(log_: EventLog, max_days: int) -> EventLog:
    """Drop traces spanning more than `max_days` from first to last event."""
    if max_days < 1:
        raise ValueError("max_days must be >= 1")
    kept = [t for t in log_ if trace_duration_days(t) <= max_days]
    return EventLog.from_traces(kept, name=log_.name)


def abstract_activities(
    log_: EventLog, rename_map: Mapping[str, Optional[str]]
) -> EventLog:
    """Relabel activities; a target of None drops the event.

    Traces left empty by dropping are removed, event order is otherwise
    preserved.
    """
    traces = []
    for tr in log_:
        events = []
        for e in tr.events:
            target = rename_map.get(e.activity, e.activity)
            if target is None:
                continue
            if target == e.activity:
                events.append(e)
            else:
                events.append(Event(e.case_id, target, e.timestamp, e.source_index))
        if events:
            traces.append(Trace(tr.case_id, tuple(events)))
    return EventLog.from_traces(traces, name=log_.name)


def variants(log_: EventLog) -> list[Variant]:
    """Group traces by activity sequence; most frequent first."""
    counts: dict[tuple[str, ...], int] = {}
    for tr in log_:
        counts[tr.activities] = counts.get(tr.activities, 0) + 1
    return [
        Variant(acts, n)
        for acts, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]


def filter_infrequent_variants(log_: EventLog, min_multiplicity: int) -> EventLog:
    """Keep only traces whose variant occurs at least `min_multiplicity` times."""
    if min_multiplicity < 1:
        raise ValueError("min_multiplicity must be >= 1")
    counts: dict[tuple[str, ...], int] = {}
    for tr in log_:
        counts[tr.activities] = counts.get(tr.activities, 0) + 1
    kept = [t for t in log_ if counts[t.activities] >= min_multiplicity]
    return EventLog.from_traces(kept, name=log_.name)


def split_by_waves(log_: EventLog, boundaries: WaveBoundaries) -> list[EventLog]:
    """Partition traces into wave buckets by first event date.

    A trace goes to bucket i iff its first date is strictly before cutoff i;
    a first date equal to a cutoff therefore lands in the later bucket.
    """
    buckets: list[list[Trace]] = [[] for _ in range(len(boundaries.cutoffs) + 1)]
    for tr in log_:
        first = tr.first_date
        for i, cutoff in enumerate(boundaries.cutoffs):
            if first < cutoff:
                buckets[i].append(tr)
                break
        else:
            buckets[-1].append(tr)
    return [
        EventLog.from_traces(bucket, name=f"{log_.name}_wave{i + 1}")
        for i, bucket in enumerate(buckets)
    ]


# ---------------------------------------------------------------------------
# dotted chart


@dataclass(frozen=True)
class DottedChartData:
    """One row per trace (sorted by first event date), one dot per event."""

    rows: tuple[str, ...]  # case ids, top to bottom
    dots: tuple[tuple[int, date, bool], ...]  # (row index, date, is_first)
    cutoffs: tuple[date, ...] = ()


def dotted_chart(
    log_: EventLog, boundaries: Optional[WaveBoundaries] = None
) -> DottedChartData:
    """Dot data for the classic event-log scatter: rows are cases sorted by
    first recorded event, x is calendar time, the first event of each case is
    flagged so it can be highlighted."""
    order = sorted(log_, key=lambda t: (t.first_date, t.case_id))
    rows = tuple(t.case_id for t in order)
    dots = []
    for row_idx, tr in enumerate(order):
        for ei, e in enumerate(tr.events):
            dots.append((row_idx, e.timestamp, ei == 0))
    cutoffs = boundaries.cutoffs if boundaries is not None else ()
    return DottedChartData(rows, tuple(dots), cutoffs)


def write_dotted_csv(data: DottedChartData, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["row_index", "case_id", "date", "is_first"])
    for row_idx, d, is_first in data.dots:
        writer.writerow([row_idx, data.rows[row_idx], d.isoformat(), int(is_first)])


def dotted_chart_svg(data: DottedChartData) -> str:
    """Standalone SVG: one circle per event, dashed vertical line per cutoff."""
    margin = 40.0
    plot_w, plot_h = 720.0, max(200.0, 12.0 + 6.0 * len(data.rows))
    width, height = plot_w + 2 * margin, plot_h + 2 * margin

    dates = [d for _, d, _ in data.dots] + list(data.cutoffs)
    if dates:
        dmin, dmax = min(dates), max(dates)
        span = max((dmax - dmin).days, 1)
    else:
        dmin, span = date(1970, 1, 1), 1

    def x_of(d: date) -> float:
        return margin + plot_w * (d - dmin).days / span

    def y_of(row: int) -> float:
        if len(data.rows) <= 1:
            return margin + plot_h / 2
        return margin + plot_h * row / (len(data.rows) - 1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<line x1="{margin}" y1="{margin + plot_h}" x2="{margin + plot_w}" '
        f'y2="{margin + plot_h}" stroke="#444" stroke-width="1"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{margin + plot_h}" stroke="#444" stroke-width="1"/>',
    ]
    if data.dots:
        parts.append(
            f'<text x="{margin}" y="{margin + plot_h + 16:.1f}" font-size="10" '
            f'fill="#444">{dmin.isoformat()}</text>'
        )
        parts.append(
            f'<text x="{margin + plot_w:.1f}" y="{margin + plot_h + 16:.1f}" '
            f'font-size="10" fill="#444" text-anchor="end">'
            f"{(dmin + timedelta(days=span)).isoformat()}</text>"
        )
    for cutoff in data.cutoffs:
        x = x_of(cutoff)
        parts.append(
            f'<line x1="{x:.2f}" y1="{margin}" x2="{x:.2f}" y2="{margin + plot_h:.2f}" '
            f'stroke="#777" stroke-width="1" stroke-dasharray="5 4"/>'
        )
    for row_idx, d, is_first in data.dots:
        fill = "#e8711a" if is_first else "#3b6fb6"
        parts.append(
            f'<circle cx="{x_of(d):.2f}" cy="{y_of(row_idx):.2f}" r="2.2" fill="{fill}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# synthetic noise


def inject_noise(
    trace: Trace,
    edits: int,
    kinds: Sequence[str],
    seed: int,
    alphabet: Sequence[str] = (),
) -> Trace:
    """Apply exactly `edits` random edits to a trace, deterministically.

    Kinds: 'drop' removes an event, 'insert' adds an event with a label from
    `alphabet` and the date of an adjacent event, 'swap' exchanges the labels
    of two adjacent events. Edits that cannot apply (drop/swap on a too-short
    trace, insert with empty alphabet) are skipped with a warning.
    """
    if edits < 0:
        raise ValueError("edits must be >= 0")
    kinds = tuple(kinds)
    for k in kinds:
        if k not in ("drop", "insert", "swap"):
            raise ValueError(f"unknown edit kind {k!r}")
    if not kinds:
        raise ValueError("at least one edit kind required")

    rng = random.Random(seed)
    seq: list[tuple[str, date]] = [(e.activity, e.timestamp) for e in trace.events]
    skipped = 0
    for _ in range(edits):
        kind = rng.choice(kinds)
        if kind == "drop":
            if not seq:
                skipped += 1
                continue
            del seq[rng.randrange(len(seq))]
        elif kind == "swap":
            if len(seq) < 2:
                skipped += 1
                continue
            i = rng.randrange(len(seq) - 1)
            seq[i], seq[i + 1] = (
                (seq[i + 1][0], seq[i][1]),
                (seq[i][0], seq[i + 1][1]),
            )
        else:  # insert
            if not alphabet:
                skipped += 1
                continue
            label = rng.choice(list(alphabet))
            pos = rng.randrange(len(seq) + 1)
            if seq:
                anchor = seq[pos - 1][1] if pos > 0 else seq[0][1]
            else:
                anchor = date(2020, 1, 1)
            seq.insert(pos, (label, anchor))
    if skipped:
        log.warning("inject_noise: %d of %d edits skipped on %s", skipped, edits, trace.case_id)

    events = tuple(
        Event(trace.case_id, label, ts, i) for i, (label, ts) in enumerate(seq)
    )
    return Trace(trace.case_id, events)


# ---------------------------------------------------------------------------
# CSV export


def write_csv(
    log_: EventLog,
    stream: IO[str],
    mapping: tuple[str, str, str] = (DEFAULT_CASE_COL, DEFAULT_ACTIVITY_COL, DEFAULT_DATE_COL),
    date_format: str = DEFAULT_DATE_FORMAT,
) -> None:
    """Write a log back to delimited text, one row per event in trace order."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(list(mapping))
    for tr in log_:
        for e in tr.events:
            writer.writerow([e.case_id, e.activity, e.timestamp.strftime(date_format)])
