import io
import logging
from datetime import date, timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from careflow import (
    Event,
    EventLog,
    LogRowError,
    LogSchemaError,
    Trace,
    WaveBoundaries,
    abstract_activities,
    average_duration_days,
    dotted_chart,
    dotted_chart_svg,
    filter_infrequent_variants,
    inject_noise,
    parse_csv,
    parse_xes,
    remove_duration_outliers,
    split_by_waves,
    trace_duration_days,
    variants,
    write_csv,
    write_dotted_csv,
)

from util import mk_log, mk_trace

CSV_SMALL = """case_id,activity,timestamp
c1,Admission,2020-03-01
c1,Discharge,2020-03-05
c2,Admission,2020-03-02
"""

XES_SMALL = """<?xml version="1.0" encoding="UTF-8"?>
<log xmlns="http://www.xes-standard.org/">
  <trace>
    <string key="concept:name" value="p7"/>
    <event>
      <string key="concept:name" value="Admission"/>
      <date key="time:timestamp" value="2020-03-01T14:35:22+01:00"/>
    </event>
    <event>
      <string key="concept:name" value="Discharge"/>
      <date key="time:timestamp" value="2020-03-04T09:00:00Z"/>
    </event>
  </trace>
</log>
"""


# --- parsing ---------------------------------------------------------------


def test_parse_csv_groups_rows_by_case():
    log = parse_csv(io.StringIO(CSV_SMALL), name="small")
    assert log.case_count == 2
    assert log.event_count == 3
    assert log.traces["c1"].activities == ("Admission", "Discharge")
    assert log.traces["c2"].activities == ("Admission",)
    assert log.name == "small"


def test_parse_csv_same_day_ties_keep_file_order():
    text = (
        "case_id,activity,timestamp\n"
        "c1,First,2020-01-01\n"
        "c1,Second,2020-01-01\n"
        "c1,Third,2020-01-01\n"
    )
    log = parse_csv(io.StringIO(text))
    assert log.traces["c1"].activities == ("First", "Second", "Third")


def test_parse_csv_sorts_events_within_case_by_date():
    text = (
        "case_id,activity,timestamp\n"
        "c1,Late,2020-01-09\n"
        "c1,Early,2020-01-02\n"
    )
    log = parse_csv(io.StringIO(text))
    assert log.traces["c1"].activities == ("Early", "Late")


def test_parse_csv_custom_mapping_and_format():
    text = "Patient;Step;When\n".replace(";", ",") + "p1,Check,01.02.2020\n"
    log = parse_csv(
        io.StringIO(text), mapping=("Patient", "Step", "When"), date_format="%d.%m.%Y"
    )
    assert log.traces["p1"].events[0].timestamp == date(2020, 2, 1)


def test_parse_csv_missing_column_names_the_column():
    with pytest.raises(LogSchemaError) as exc:
        parse_csv(io.StringIO("case_id,activity\nc1,A\n"))
    assert "timestamp" in str(exc.value)


def test_parse_csv_empty_stream_has_no_header():
    with pytest.raises(LogSchemaError):
        parse_csv(io.StringIO(""))


def test_parse_csv_bad_date_reports_line_number():
    text = "case_id,activity,timestamp\nc1,A,2020-01-01\nc1,B,not-a-date\n"
    with pytest.raises(LogRowError) as exc:
        parse_csv(io.StringIO(text))
    assert exc.value.line == 3


def test_parse_csv_rejects_blank_case_and_activity():
    with pytest.raises(LogRowError):
        parse_csv(io.StringIO("case_id,activity,timestamp\n ,A,2020-01-01\n"))
    with pytest.raises(LogRowError):
        parse_csv(io.StringIO("case_id,activity,timestamp\nc1, ,2020-01-01\n"))


def test_parse_xes_truncates_timestamps_to_days():
    log = parse_xes(io.BytesIO(XES_SMALL.encode()))
    tr = log.traces["p7"]
    assert tr.activities == ("Admission", "Discharge")
    assert tr.events[0].timestamp == date(2020, 3, 1)
    assert tr.events[1].timestamp == date(2020, 3, 4)


def test_parse_xes_duplicate_case_id_rejected():
    dup = XES_SMALL.replace("</log>", "") + XES_SMALL.split("<log", 1)[1].split(">", 1)[1]
    with pytest.raises(LogSchemaError):
        parse_xes(io.BytesIO(dup.encode()))


def test_parse_xes_event_without_activity_rejected():
    text = XES_SMALL.replace('<string key="concept:name" value="Admission"/>', "")
    with pytest.raises(LogRowError):
        parse_xes(io.BytesIO(text.encode()))


def test_parse_xes_malformed_xml():
    with pytest.raises(LogSchemaError):
        parse_xes(io.BytesIO(b"<log><trace>"))


# --- core objects ----------------------------------------------------------


def test_trace_rejects_foreign_events():
    with pytest.raises(ValueError):
        Trace("c1", (Event("c2", "A", date(2020, 1, 1), 0),))


def test_event_log_rejects_duplicate_cases():
    tr = mk_trace("c1", ["A"])
    with pytest.raises(ValueError):
        EventLog.from_traces([tr, tr])


def test_event_requires_activity_and_date():
    with pytest.raises(ValueError):
        Event("c1", "", date(2020, 1, 1), 0)
    with pytest.raises(TypeError):
        Event("c1", "A", "2020-01-01", 0)


@given(st.permutations(list(range(6))))
def test_trace_event_order_is_canonical(order):
    base = date(2021, 5, 1)
    events = [Event("c", f"A{i}", base + timedelta(days=i // 2), i) for i in range(6)]
    shuffled = tuple(events[i] for i in order)
    assert Trace("c", shuffled).events == Trace("c", tuple(events)).events


# --- preprocessing ---------------------------------------------------------


def test_trace_duration_days():
    assert trace_duration_days(mk_trace("c", ["A"])) == 0
    tr = Trace(
        "c",
        (
            Event("c", "A", date(2020, 1, 1), 0),
            Event("c", "B", date(2020, 1, 26), 1),
        ),
    )
    assert trace_duration_days(tr) == 25


def test_average_duration_days():
    log = EventLog.from_traces(
        [
            Trace("a", (Event("a", "X", date(2020, 1, 1), 0), Event("a", "Y", date(2020, 1, 1), 1))),
            Trace("b", (Event("b", "X", date(2020, 1, 1), 0), Event("b", "Y", date(2020, 1, 11), 1))),
        ]
    )
    assert average_duration_days(log) == pytest.approx(5.0)


def test_outlier_filter_is_inclusive_at_the_threshold():
    spans = {"keep70": 70, "drop71": 71, "single": 0}
    traces = []
    for cid, span in spans.items():
        events = (
            Event(cid, "A", date(2020, 1, 1), 0),
            Event(cid, "B", date(2020, 1, 1) + timedelta(days=span), 1),
        )
        traces.append(Trace(cid, events[: 2 if span else 1]))
    log = EventLog.from_traces(traces)
    cleaned = remove_duration_outliers(log, max_days=70)
    assert set(cleaned.traces) == {"keep70", "single"}
    # the input log is untouched
    assert set(log.traces) == {"keep70", "drop71", "single"}


def test_outlier_filter_rejects_nonpositive_threshold():
    with pytest.raises(ValueError):
        remove_duration_outliers(mk_log({"c": ["A"]}), 0)


def test_abstraction_merges_variants():
    log = mk_log({"c1": ["Aspirin", "Check"], "c2": ["Ibuprofen", "Check"]})
    out = abstract_activities(log, {"Aspirin": "Painkiller", "Ibuprofen": "Painkiller"})
    assert len(variants(out)) == 1
    assert variants(out)[0].activities == ("Painkiller", "Check")


def test_abstraction_none_drops_events_and_empty_traces():
    log = mk_log({"c1": ["Noise"], "c2": ["Noise", "Keep"]})
    out = abstract_activities(log, {"Noise": None})
    assert set(out.traces) == {"c2"}
    assert out.traces["c2"].activities == ("Keep",)


def test_variants_order_and_multiplicity():
    log = mk_log({"a": ["X"], "b": ["X"], "c": ["Y", "Z"]})
    vs = variants(log)
    assert [(v.activities, v.multiplicity) for v in vs] == [
        (("X",), 2),
        (("Y", "Z"), 1),
    ]


def test_variant_filter():
    log = mk_log({"a": ["X"], "b": ["X"], "c": ["Y"]})
    assert set(filter_infrequent_variants(log, 1).traces) == {"a", "b", "c"}
    assert set(filter_infrequent_variants(log, 2).traces) == {"a", "b"}
    assert len(filter_infrequent_variants(log, 3)) == 0


def test_wave_split_on_cutoff_goes_to_later_bucket():
    log = EventLog.from_traces(
        [
            mk_trace("before", ["A"], start=date(2020, 3, 30)),
            mk_trace("oncut", ["A"], start=date(2020, 4, 1)),
            mk_trace("after", ["A"], start=date(2020, 6, 2)),
        ]
    )
    waves = split_by_waves(log, WaveBoundaries((date(2020, 4, 1),)))
    assert set(waves[0].traces) == {"before"}
    assert set(waves[1].traces) == {"oncut", "after"}
    assert [w.name for w in waves] == ["log_wave1", "log_wave2"]


def test_wave_boundaries_must_ascend():
    with pytest.raises(ValueError):
        WaveBoundaries((date(2020, 5, 1), date(2020, 4, 1)))


@settings(max_examples=60)
@given(
    st.lists(st.integers(min_value=0, max_value=400), min_size=0, max_size=12),
    st.lists(st.integers(min_value=1, max_value=399), min_size=0, max_size=3, unique=True),
)
def test_wave_split_is_a_partition(first_offsets, cutoff_offsets):
    base = date(2020, 1, 1)
    log = EventLog.from_traces(
        [mk_trace(f"c{i}", ["A"], start=base + timedelta(days=off)) for i, off in enumerate(first_offsets)]
    )
    cutoffs = tuple(base + timedelta(days=d) for d in sorted(cutoff_offsets))
    waves = split_by_waves(log, WaveBoundaries(cutoffs))
    assert len(waves) == len(cutoffs) + 1
    seen = [cid for w in waves for cid in w.traces]
    assert sorted(seen) == sorted(log.traces)
    assert len(seen) == len(set(seen))


# --- dotted chart ----------------------------------------------------------


def test_dotted_chart_rows_sorted_by_first_date_then_case():
    log = EventLog.from_traces(
        [
            mk_trace("zeta", ["A"], start=date(2020, 1, 1)),
            mk_trace("alpha", ["A"], start=date(2020, 1, 1)),
            mk_trace("late", ["A"], start=date(2020, 2, 1)),
        ]
    )
    data = dotted_chart(log)
    assert data.rows == ("alpha", "zeta", "late")


def test_dotted_chart_one_dot_per_event_first_flagged():
    log = mk_log({"c1": ["A", "B", "C"]})
    data = dotted_chart(log)
    assert len(data.dots) == 3
    assert [is_first for _, _, is_first in data.dots] == [True, False, False]


def test_dotted_csv_shape():
    log = mk_log({"c1": ["A", "B"]})
    buf = io.StringIO()
    write_dotted_csv(dotted_chart(log), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "row_index,case_id,date,is_first"
    assert lines[1] == "0,c1,2020-01-01,1"
    assert lines[2] == "0,c1,2020-01-02,0"


def test_dotted_svg_counts_circles_and_separators():
    log = mk_log({"c1": ["A", "B"], "c2": ["A"]})
    data = dotted_chart(log, WaveBoundaries((date(2020, 1, 2),)))
    svg = dotted_chart_svg(data)
    assert svg.count("<circle") == 3
    assert svg.count("stroke-dasharray") == 1
    assert svg.startswith("<svg ")


def test_dotted_svg_handles_empty_log():
    svg = dotted_chart_svg(dotted_chart(EventLog.from_traces([])))
    assert svg.count("<circle") == 0
    assert "<svg" in svg


@settings(max_examples=40)
@given(st.lists(st.integers(min_value=1, max_value=5), min_size=0, max_size=8))
def test_dotted_chart_dot_cardinality(lengths):
    log = EventLog.from_traces(
        [mk_trace(f"c{i}", [f"A{j}" for j in range(n)]) for i, n in enumerate(lengths)]
    )
    data = dotted_chart(log)
    assert len(data.dots) == log.event_count
    assert sum(1 for _, _, f in data.dots if f) == log.case_count


# --- noise -----------------------------------------------------------------


def test_inject_noise_zero_edits_is_identity():
    tr = mk_trace("c", ["A", "B", "C"])
    assert inject_noise(tr, 0, ("drop",), seed=5) == tr


def test_inject_noise_drop_shortens():
    tr = mk_trace("c", ["A", "B"])
    out = inject_noise(tr, 1, ("drop",), seed=0)
    assert len(out) == 1


def test_inject_noise_insert_uses_alphabet_and_adjacent_date():
    tr = mk_trace("c", ["A", "B"])
    out = inject_noise(tr, 1, ("insert",), seed=3, alphabet=("X",))
    assert len(out) == 3
    assert "X" in out.activities
    dates = {e.timestamp for e in tr.events}
    inserted = [e for e in out.events if e.activity == "X"][0]
    assert inserted.timestamp in dates


def test_inject_noise_swap_keeps_dates_in_place():
    tr = mk_trace("c", ["A", "B"])
    out = inject_noise(tr, 1, ("swap",), seed=1)
    assert out.activities == ("B", "A")
    assert [e.timestamp for e in out.events] == [e.timestamp for e in tr.events]


def test_inject_noise_skips_impossible_edits_with_warning(caplog):
    tr = mk_trace("c", ["A"])
    with caplog.at_level(logging.WARNING):
        out = inject_noise(tr, 2, ("swap",), seed=0)
    assert out.activities == ("A",)
    assert any("skipped" in rec.message for rec in caplog.records)


def test_inject_noise_validates_arguments():
    tr = mk_trace("c", ["A"])
    with pytest.raises(ValueError):
        inject_noise(tr, -1, ("drop",), seed=0)
    with pytest.raises(ValueError):
        inject_noise(tr, 1, ("teleport",), seed=0)
    with pytest.raises(ValueError):
        inject_noise(tr, 1, (), seed=0)


@settings(max_examples=40)
@given(st.integers(min_value=0, max_value=6), st.integers(min_value=0, max_value=2**30))
def test_inject_noise_is_deterministic_per_seed(edits, seed):
    tr = mk_trace("c", ["A", "B", "C", "D"])
    kinds = ("drop", "insert", "swap")
    first = inject_noise(tr, edits, kinds, seed=seed, alphabet=("A", "Z"))
    second = inject_noise(tr, edits, kinds, seed=seed, alphabet=("A", "Z"))
    assert first == second


# --- round trip ------------------------------------------------------------


def test_csv_round_trip():
    log = parse_csv(io.StringIO(CSV_SMALL))
    buf = io.StringIO()
    write_csv(log, buf)
    again = parse_csv(io.StringIO(buf.getvalue()))
    assert again.traces == log.traces
    assert buf.getvalue() == CSV_SMALL
