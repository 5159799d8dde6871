"""BPMN 2.0 XML subset: parser, structural statistics, validation.

Supported elements are plain start/end events, tasks (task, userTask,
serviceTask), exclusive/parallel/inclusive gateways, sub-processes and
sequence flows. Everything else is warned about and ignored unless it
carries sequence flow, which is a structural error.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import IO, Iterator, Optional

log = logging.getLogger(__name__)

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"

START_EVENT = "start_event"
END_EVENT = "end_event"
TASK = "task"
GATEWAY = "gateway"
SUBPROCESS = "subprocess"

XOR = "XOR"
AND = "AND"
OR = "OR"

SPLIT = "split"
JOIN = "join"

_TASK_TAGS = {"task", "userTask", "serviceTask"}
_GATEWAY_TAGS = {"exclusiveGateway": XOR, "parallelGateway": AND, "inclusiveGateway": OR}


class BpmnStructureError(ValueError):
    """The model violates the supported structural subset."""


@dataclass(frozen=True)
class SequenceFlow:
    id: str
    source: str
    target: str


@dataclass(frozen=True)
class BpmnNode:
    id: str
    kind: str
    label: str = ""
    gateway_kind: Optional[str] = None
    direction: Optional[str] = None
    children: Optional["BpmnModel"] = None


@dataclass(frozen=True)
class BpmnModel:
    """One process scope: nodes plus the sequence flows connecting them."""

    nodes: dict[str, BpmnNode]
    flows: tuple[SequenceFlow, ...]
    name: str = ""
    warnings: tuple[str, ...] = ()

    def node(self, node_id: str) -> BpmnNode:
        return self.nodes[node_id]

    def incoming(self, node_id: str) -> list[SequenceFlow]:
        return [f for f in self.flows if f.target == node_id]

    def outgoing(self, node_id: str) -> list[SequenceFlow]:
        return [f for f in self.flows if f.source == node_id]

    def scopes(self) -> Iterator["BpmnModel"]:
        """This scope followed by all nested sub-process scopes."""
        yield self
        for n in self.nodes.values():
            if n.kind == SUBPROCESS and n.children is not None:
                yield from n.children.scopes()


@dataclass(frozen=True)
class ModelStats:
    tasks: int
    gateways_xor: int
    gateways_and: int
    gateways_or: int
    subprocesses: int
    flows: int

    @property
    def gateways_total(self) -> int:
        return self.gateways_xor + self.gateways_and + self.gateways_or


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    subject: str  # node or flow id
    message: str


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_scope(scope_el: ET.Element, name: str, warnings: list[str]) -> BpmnModel:
    nodes: dict[str, BpmnNode] = {}
    flows: list[SequenceFlow] = []

    for child in scope_el:
        tag = _local(child.tag)
        node_id = child.get("id", "")
        if tag == "sequenceFlow":
            flows.append(
                SequenceFlow(node_id, child.get("sourceRef", ""), child.get("targetRef", ""))
            )
            continue
        if tag in ("incoming", "outgoing", "documentation", "extensionElements"):
            continue
        if not node_id:
            warnings.append(f"{name}: <{tag}> without id ignored")
            continue
        if node_id in nodes:
            raise BpmnStructureError(f"duplicate node id {node_id!r}")
        if tag == "startEvent":
            nodes[node_id] = BpmnNode(node_id, START_EVENT)
        elif tag == "endEvent":
            nodes[node_id] = BpmnNode(node_id, END_EVENT)
        elif tag in _TASK_TAGS:
            label = (child.get("name") or "").strip()
            if not label:
                raise BpmnStructureError(f"task {node_id!r} has an empty label")
            nodes[node_id] = BpmnNode(node_id, TASK, label=label)
        elif tag in _GATEWAY_TAGS:
            nodes[node_id] = BpmnNode(node_id, GATEWAY, gateway_kind=_GATEWAY_TAGS[tag])
        elif tag == "subProcess":
            sub_name = (child.get("name") or node_id).strip()
            sub = _parse_scope(child, sub_name, warnings)
            _check_scope_events(sub, sub_name)
            nodes[node_id] = BpmnNode(node_id, SUBPROCESS, label=sub_name, children=sub)
        else:
            warnings.append(f"{name}: unsupported element <{tag}> id={node_id!r} ignored")

    # flows referencing unknown or unsupported nodes are structural errors
    dangling = sorted(
        {f.source for f in flows if f.source not in nodes}
        | {f.target for f in flows if f.target not in nodes}
    )
    if dangling:
        raise BpmnStructureError(f"{name}: sequence flow references unknown nodes {dangling}")

    in_deg = {nid: 0 for nid in nodes}
    out_deg = {nid: 0 for nid in nodes}
    for f in flows:
        out_deg[f.source] += 1
        in_deg[f.target] += 1

    resolved: dict[str, BpmnNode] = {}
    for nid, node in nodes.items():
        if node.kind == GATEWAY:
            i, o = in_deg[nid], out_deg[nid]
            if i == 1 and o >= 2:
                direction = SPLIT
            elif i >= 2 and o == 1:
                direction = JOIN
            elif i >= 2 and o >= 2:
                raise BpmnStructureError(f"mixed gateway {nid!r} (in={i}, out={o}) unsupported")
            else:
                raise BpmnStructureError(f"gateway {nid!r} with in={i}, out={o} is not a gateway")
            resolved[nid] = BpmnNode(
                nid, GATEWAY, gateway_kind=node.gateway_kind, direction=direction
            )
        else:
            if node.kind == TASK and out_deg[nid] > 1:
                raise BpmnStructureError(
                    f"task {nid!r} has {out_deg[nid]} outgoing flows; use an explicit gateway"
                )
            resolved[nid] = node

    return BpmnModel(resolved, tuple(flows), name=name)


def _check_scope_events(scope: BpmnModel, name: str) -> None:
    starts = [n for n in scope.nodes.values() if n.kind == START_EVENT]
    ends = [n for n in scope.nodes.values() if n.kind == END_EVENT]
    if len(starts) != 1:
        raise BpmnStructureError(f"{name}: expected exactly 1 start event, found {len(starts)}")
    if not ends:
        raise BpmnStructureError(f"{name}: expected at least 1 end event")


def parse_bpmn(stream: IO) -> BpmnModel:
    """Parse a BPMN 2.0 XML document into the supported model subset."""
    try:
        tree = ET.parse(stream)
    except ET.ParseError as exc:
        raise BpmnStructureError(f"malformed BPMN XML: {exc}") from exc
    root = tree.getroot()

    process_el = None
    for el in root.iter():
        if _local(el.tag) == "process":
            process_el = el
            break
    if process_el is None:
        raise BpmnStructureError("no <process> element found")

    warnings: list[str] = []
    name = (process_el.get("name") or process_el.get("id") or "process").strip()
    model = _parse_scope(process_el, name, warnings)
    _check_scope_events(model, name)
    for w in warnings:
        log.warning("%s", w)
    return BpmnModel(model.nodes, model.flows, model.name, warnings=tuple(warnings))


def model_stats(model: BpmnModel) -> ModelStats:
    """Counts over all nesting levels; sub-process contents included."""
    tasks = xor = and_ = or_ = subs = flows = 0
    for scope in model.scopes():
        flows += len(scope.flows)
        for n in scope.nodes.values():
            if n.kind == TASK:
                tasks += 1
            elif n.kind == SUBPROCESS:
                subs += 1
            elif n.kind == GATEWAY:
                if n.gateway_kind == XOR:
                    xor += 1
                elif n.gateway_kind == AND:
                    and_ += 1
                else:
                    or_ += 1
    return ModelStats(tasks, xor, and_, or_, subs, flows)


def validate(model: BpmnModel) -> list[Diagnostic]:
    """Structural diagnostics; empty result means the model is compilable."""
    out: list[Diagnostic] = []
    for scope in model.scopes():
        starts = [n.id for n in scope.nodes.values() if n.kind == START_EVENT]
        ends = [n.id for n in scope.nodes.values() if n.kind == END_EVENT]
        if len(starts) != 1:
            out.append(
                Diagnostic("error", scope.name, f"scope has {len(starts)} start events, wanted 1")
            )
            continue
        if not ends:
            out.append(Diagnostic("error", scope.name, "scope has no end event"))
            continue

        succ: dict[str, list[str]] = {nid: [] for nid in scope.nodes}
        pred: dict[str, list[str]] = {nid: [] for nid in scope.nodes}
        for f in scope.flows:
            succ[f.source].append(f.target)
            pred[f.target].append(f.source)

        for n in scope.nodes.values():
            if n.kind == START_EVENT and pred[n.id]:
                out.append(Diagnostic("error", n.id, "start event has incoming flow"))
            if n.kind == END_EVENT and succ[n.id]:
                out.append(Diagnostic("error", n.id, "end event has outgoing flow"))

        reachable = _closure(starts[0], succ)
        coreachable: set[str] = set()
        for e in ends:
            coreachable |= _closure(e, pred)
        for nid in sorted(scope.nodes):
            if nid not in reachable:
                out.append(Diagnostic("error", nid, "not reachable from the start event"))
            elif nid not in coreachable:
                out.append(Diagnostic("error", nid, "no path to any end event"))
    return out


def _closure(origin: str, edges: dict[str, list[str]]) -> set[str]:
    seen = {origin}
    stack = [origin]
    while stack:
        for nxt in edges[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen
