"""Shared helpers for the test suite: tiny model builders and log makers."""

from __future__ import annotations

import io
from datetime import date, timedelta
from importlib import resources
from xml.sax.saxutils import quoteattr

from careflow import EventLog, Event, Trace, compile_bpmn, parse_bpmn

STAKOB_PATH = resources.files("careflow").joinpath("fixtures/stakob_covid19.bpmn")

_HEADER = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    '<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL" '
    'id="defs" targetNamespace="test">\n'
)


def wrap_process(body: str, name: str = "proc") -> str:
    return f'{_HEADER}<process id="{name}" name="{name}">\n{body}\n</process>\n</definitions>\n'


def model_from(body: str, name: str = "proc"):
    return parse_bpmn(io.StringIO(wrap_process(body, name)))


def net_from(body: str, name: str = "proc"):
    return compile_bpmn(model_from(body, name))


def seq_body(*labels: str) -> str:
    """start -> T1 -> ... -> Tn -> end"""
    parts = ['<startEvent id="s"/>']
    prev = "s"
    lines_flows = []
    for i, label in enumerate(labels, start=1):
        parts.append(f'<task id="t{i}" name={quoteattr(label)}/>')
        lines_flows.append(f'<sequenceFlow id="f{i}" sourceRef="{prev}" targetRef="t{i}"/>')
        prev = f"t{i}"
    parts.append('<endEvent id="e"/>')
    lines_flows.append(f'<sequenceFlow id="f{len(labels) + 1}" sourceRef="{prev}" targetRef="e"/>')
    return "\n".join(parts + lines_flows)


def gateway_pair_body(tag: str, a: str = "A", b: str = "B") -> str:
    """start -> split(tag) -> {a | b} -> join(tag) -> end"""
    return f"""<startEvent id="s"/>
<{tag} id="gs"/>
<task id="ta" name="{a}"/>
<task id="tb" name="{b}"/>
<{tag} id="gj"/>
<endEvent id="e"/>
<sequenceFlow id="f1" sourceRef="s" targetRef="gs"/>
<sequenceFlow id="f2" sourceRef="gs" targetRef="ta"/>
<sequenceFlow id="f3" sourceRef="gs" targetRef="tb"/>
<sequenceFlow id="f4" sourceRef="ta" targetRef="gj"/>
<sequenceFlow id="f5" sourceRef="tb" targetRef="gj"/>
<sequenceFlow id="f6" sourceRef="gj" targetRef="e"/>"""


def mk_trace(case_id: str, labels, start: date = date(2020, 1, 1)) -> Trace:
    events = tuple(
        Event(case_id, label, start + timedelta(days=i), i)
        for i, label in enumerate(labels)
    )
    return Trace(case_id, events)


def mk_log(cases: dict, name: str = "log", start: date = date(2020, 1, 1)) -> EventLog:
    """cases: case_id -> label sequence; all traces start on `start`."""
    return EventLog.from_traces(
        [mk_trace(cid, labels, start) for cid, labels in cases.items()], name=name
    )


def enumerate_language(net, max_visible: int = 12) -> set[tuple[str, ...]]:
    """All visible-label sequences of complete firing runs (acyclic nets only).

    Cycles are cut by refusing to revisit a marking on the current path, so
    a looping net would yield only its loop-free words; the tests that call
    this stick to loop-free blocks.
    """
    out: set[tuple[str, ...]] = set()

    def walk(marking, visible, on_path):
        if net.is_final(marking):
            out.add(tuple(visible))
            return
        if len(visible) > max_visible:
            raise AssertionError("language enumeration exceeded the visible bound")
        for tid in net.enabled(marking):
            nxt = net.fire(marking, tid)
            if nxt in on_path:
                continue
            label = net.transition(tid).label
            walk(nxt, visible + ([label] if label else []), on_path | {nxt})

    start = net.initial_marking
    walk(start, [], frozenset({start}))
    return out
