"""Petri nets: data model, BPMN compilation, playout, and PNML export.

The net model is intentionally small. Places are string ids, transitions
carry an optional activity label (``None`` marks a silent transition),
and every arc has weight one. Compiled nets are workflow nets: a single
source place holds the initial token and a single sink place carries the
final marking.

The compiler targets block-structured BPMN. Exclusive gateways become
places with choice arcs, parallel gateways become silent fork/join
transitions, and inclusive gateways are expanded by enumerating branch
subsets. Sub-processes are inlined. The translation used by the original
guideline study is not documented, so this module is a reconstruction
built around the standard place/transition mapping; see the project
README for the assumptions made.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Iterator, Mapping, Optional
from xml.sax.saxutils import escape

from .bpmn import (
    AND,
    BpmnModel,
    END_EVENT,
    GATEWAY,
    OR,
    SPLIT,
    START_EVENT,
    SUBPROCESS,
    TASK,
    XOR,
    validate,
)
from .event_log import Event, Trace

# Inclusive gateways with more than this many branches would need 2^k - 1
# silent routes per side; refuse rather than blow up.
OR_BRANCH_LIMIT = 10

_EXIT = "__exit__"


class CompileError(Exception):
    """The BPMN model cannot be translated to a Petri net."""


class FiringError(Exception):
    """A transition was fired although it is not enabled."""


class PlayoutDeadEnd(Exception):
    """A random playout stopped before reaching the final marking."""

    def __init__(self, marking: "Marking", steps: int, reason: str, case_id: str = ""):
        self.marking = marking
        self.steps = steps
        self.reason = reason
        self.case_id = case_id
        super().__init__(
            f"playout dead end after {steps} steps ({reason}); stuck marking {marking}"
        )


class Marking:
    """Immutable multiset of places.

    Zero counts are dropped on construction, so two markings compare
    equal iff they assign the same positive token counts.
    """

    __slots__ = ("_counts",)

    def __init__(self, counts: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        if isinstance(counts, Marking):
            items: Iterable[tuple[str, int]] = counts.items()
        elif isinstance(counts, Mapping):
            items = counts.items()
        else:
            items = counts
        agg: dict[str, int] = {}
        for pid, n in items:
            if not isinstance(n, int) or isinstance(n, bool):
                raise ValueError(f"token count for {pid!r} must be an integer")
            if n < 0:
                raise ValueError(f"negative token count for {pid!r}")
            if n:
                agg[pid] = agg.get(pid, 0) + n
        self._counts = tuple(sorted(agg.items()))

    def items(self) -> tuple[tuple[str, int], ...]:
        return self._counts

    def get(self, pid: str) -> int:
        for p, n in self._counts:
            if p == pid:
                return n
        return 0

    def places(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self._counts)

    def total(self) -> int:
        return sum(n for _, n in self._counts)

    def to_dict(self) -> dict[str, int]:
        return dict(self._counts)

    def __contains__(self, pid: str) -> bool:
        return self.get(pid) > 0

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Marking):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self) -> int:
        return hash(self._counts)

    def __repr__(self) -> str:
        inner = ", ".join(f"{p}:{n}" for p, n in self._counts)
        return f"[{inner}]"


@dataclass(frozen=True)
class Transition:
    """A net transition; ``label is None`` means silent."""

    tid: str
    label: Optional[str] = None

    @property
    def is_silent(self) -> bool:
        return self.label is None


@dataclass(frozen=True)
class PetriNet:
    """A labeled place/transition net with initial and final markings."""

    name: str
    places: tuple[str, ...]
    transitions: tuple[Transition, ...]
    pre: Mapping[str, frozenset[str]]
    post: Mapping[str, frozenset[str]]
    initial_marking: Marking
    final_marking: Marking
    _by_id: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        place_set = set(self.places)
        if len(place_set) != len(self.places):
            raise ValueError("duplicate place ids")
        object.__setattr__(
            self, "transitions", tuple(sorted(self.transitions, key=lambda t: t.tid))
        )
        by_id: dict[str, Transition] = {}
        for t in self.transitions:
            if t.tid in by_id or t.tid in place_set:
                raise ValueError(f"duplicate or clashing id {t.tid!r}")
            by_id[t.tid] = t
        for t in self.transitions:
            ins, outs = self.pre.get(t.tid), self.post.get(t.tid)
            if not ins or not outs:
                raise ValueError(f"transition {t.tid!r} must have inputs and outputs")
            for pid in set(ins) | set(outs):
                if pid not in place_set:
                    raise ValueError(f"arc of {t.tid!r} references unknown place {pid!r}")
        for m in (self.initial_marking, self.final_marking):
            for pid in m.places():
                if pid not in place_set:
                    raise ValueError(f"marking references unknown place {pid!r}")
        object.__setattr__(self, "_by_id", by_id)

    def transition(self, tid: str) -> Transition:
        return self._by_id[tid]

    def visible_labels(self) -> tuple[str, ...]:
        return tuple(sorted({t.label for t in self.transitions if t.label is not None}))

    def enabled(self, marking: Marking) -> tuple[str, ...]:
        """Ids of transitions enabled at ``marking``, in id order."""
        out = []
        for t in self.transitions:
            if all(marking.get(p) >= 1 for p in self.pre[t.tid]):
                out.append(t.tid)
        return tuple(out)

    def fire(self, marking: Marking, tid: str) -> Marking:
        """Fire ``tid`` and return the successor marking (pure)."""
        if tid not in self._by_id:
            raise FiringError(f"unknown transition {tid!r}")
        counts = marking.to_dict()
        for p in self.pre[tid]:
            if counts.get(p, 0) < 1:
                raise FiringError(f"transition {tid!r} is not enabled at {marking}")
        for p in self.pre[tid]:
            counts[p] -= 1
            if not counts[p]:
                del counts[p]
        for p in self.post[tid]:
            counts[p] = counts.get(p, 0) + 1
        return Marking(counts)

    def is_final(self, marking: Marking) -> bool:
        return marking == self.final_marking


def enabled(net: PetriNet, marking: Marking) -> tuple[str, ...]:
    return net.enabled(marking)


def fire(net: PetriNet, marking: Marking, tid: str) -> Marking:
    return net.fire(marking, tid)


def is_final(net: PetriNet, marking: Marking) -> bool:
    return net.is_final(marking)


# ---------------------------------------------------------------------------
# BPMN compilation


@dataclass(frozen=True)
class _FlatNode:
    id: str
    kind: str
    label: str
    gateway_kind: str
    direction: str


def _flatten(model: BpmnModel) -> tuple[dict[str, _FlatNode], list[tuple[str, str, str]], str, tuple[str, ...]]:
    """Inline sub-processes into one flat node/flow graph.

    Outer flows into a sub-process are re-targeted at its inner start
    event. A sub-process with several end events gets them merged into
    one completion node first (alternative completions are exclusive,
    so they must share a place, not hand the successor several input
    arcs); the outer flow out of it is then re-sourced from that single
    completion.
    """
    nodes: dict[str, _FlatNode] = {}
    flows: list[tuple[str, str, str]] = []

    def do_scope(scope: BpmnModel, sp_id: str = "") -> tuple[str, tuple[str, ...]]:
        start_id = ""
        end_ids: list[str] = []
        sub_io: dict[str, tuple[str, tuple[str, ...]]] = {}
        for nid in sorted(scope.nodes):
            node = scope.nodes[nid]
            if node.kind == SUBPROCESS:
                if len(scope.outgoing(nid)) > 1:
                    raise CompileError(
                        f"sub-process {nid!r} has multiple outgoing flows; "
                        "use an explicit gateway"
                    )
                sub_io[nid] = do_scope(node.children, sp_id=nid)
            else:
                nodes[nid] = _FlatNode(
                    nid, node.kind, node.label, node.gateway_kind, node.direction
                )
                if node.kind == START_EVENT:
                    start_id = nid
                elif node.kind == END_EVENT:
                    end_ids.append(nid)

        # several completions of a sub-process collapse into one node;
        # the top scope keeps its end events (they share a sink later)
        end_remap: dict[str, str] = {}
        if sp_id and len(end_ids) > 1:
            done_id = f"{sp_id}__done"
            nodes[done_id] = _FlatNode(done_id, END_EVENT, "", "", "")
            end_remap = {eid: done_id for eid in end_ids}
            for eid in end_ids:
                del nodes[eid]
            end_ids = [done_id]

        for flow in sorted(scope.flows, key=lambda f: f.id):
            src, dst = flow.source, flow.target
            dst = end_remap.get(dst, dst)
            if dst in sub_io:
                dst = sub_io[dst][0]
            if src in sub_io:
                (end_id,) = sub_io[src][1]
                flows.append((f"{flow.id}__{end_id}", end_id, dst))
            else:
                flows.append((flow.id, src, dst))
        return start_id, tuple(end_ids)

    top_start, top_ends = do_scope(model)
    return nodes, flows, top_start, top_ends


def _postdominators(node_ids: Iterable[str], succ: Mapping[str, set[str]]) -> dict[str, set[str]]:
    """Postdominator sets over the flat graph, with a virtual exit node."""
    universe = set(node_ids) | {_EXIT}
    pdom: dict[str, set[str]] = {n: set(universe) for n in universe}
    pdom[_EXIT] = {_EXIT}
    changed = True
    while changed:
        changed = False
        for n in sorted(universe):
            if n == _EXIT:
                continue
            successors = succ.get(n, set())
            if successors:
                new = set.intersection(*(pdom[s] for s in sorted(successors)))
            else:
                new = set()
            new = new | {n}
            if new != pdom[n]:
                pdom[n] = new
                changed = True
    return pdom


def _branch_exit_flows(
    flows_by_src: Mapping[str, list[tuple[str, str, str]]],
    split_id: str,
    branch_flow: tuple[str, str, str],
    join_id: str,
) -> set[str]:
    """Ids of join in-flows reachable from one split branch.

    The walk stops at the join; re-entering the split without passing
    the join means the region is not block-structured.
    """
    hits: set[str] = set()
    seen_nodes: set[str] = set()
    stack = [branch_flow]
    while stack:
        fid, _src, dst = stack.pop()
        if dst == join_id:
            hits.add(fid)
            continue
        if dst == split_id:
            raise CompileError(
                f"inclusive block at {split_id!r} is not block-structured: "
                f"a branch re-enters the split before reaching {join_id!r}"
            )
        if dst in seen_nodes:
            continue
        seen_nodes.add(dst)
        stack.extend(flows_by_src.get(dst, ()))
    return hits


def compile_bpmn(model: BpmnModel, or_branch_limit: int = OR_BRANCH_LIMIT) -> PetriNet:
    """Translate a validated BPMN model into a labeled workflow net.

    Tasks become visible transitions; exclusive gateways, start/end
    events and inlined sub-process boundaries become places; parallel
    gateways become silent transitions. An inclusive split with k
    branches is expanded into 2^k - 1 silent subset routes, each paired
    with a memory place so the matching join consumes exactly the
    branches the split activated. Inclusive gateways are therefore
    supported only in block-structured split/join pairs, found by
    postdominator analysis.

    Raises CompileError for models that fail validation, implicit
    splits/merges at tasks or events, unmatched inclusive gateways, or
    inclusive splits wider than ``or_branch_limit``.
    """
    errors = [d for d in validate(model) if d.severity == "error"]
    if errors:
        listing = "; ".join(f"{d.subject}: {d.message}" for d in errors)
        raise CompileError(f"model failed validation: {listing}")

    nodes, flows, top_start, top_ends = _flatten(model)

    flows_by_src: dict[str, list[tuple[str, str, str]]] = {}
    flows_by_dst: dict[str, list[tuple[str, str, str]]] = {}
    succ: dict[str, set[str]] = {}
    for f in flows:
        flows_by_src.setdefault(f[1], []).append(f)
        flows_by_dst.setdefault(f[2], []).append(f)
        succ.setdefault(f[1], set()).add(f[2])
    for end_id in top_ends:
        succ.setdefault(end_id, set()).add(_EXIT)

    for nid in sorted(nodes):
        node = nodes[nid]
        indeg = len(flows_by_dst.get(nid, ()))
        outdeg = len(flows_by_src.get(nid, ()))
        if node.kind == TASK and indeg > 1:
            raise CompileError(
                f"implicit merge at task {nid!r}; use an explicit gateway"
            )
        if node.kind in (START_EVENT, END_EVENT) and outdeg > 1:
            raise CompileError(
                f"implicit split at event {nid!r}; use an explicit gateway"
            )

    # Element tables. _claim guards against id collisions between the
    # name spaces derived from node ids and flow ids.
    claimed: set[str] = set()

    def _claim(eid: str) -> str:
        if eid in claimed:
            raise CompileError(f"internal id collision on {eid!r}")
        claimed.add(eid)
        return eid

    places: list[str] = []
    trans: dict[str, Optional[str]] = {}
    pre: dict[str, set[str]] = {}
    post: dict[str, set[str]] = {}

    def add_place(pid: str) -> str:
        places.append(_claim(pid))
        return pid

    def add_trans(tid: str, label: Optional[str]) -> str:
        trans[_claim(tid)] = label
        pre[tid] = set()
        post[tid] = set()
        return tid

    def arc_pt(pid: str, tid: str) -> None:
        if pid in pre[tid]:
            raise CompileError(f"duplicate arc {pid!r} -> {tid!r}")
        pre[tid].add(pid)

    def arc_tp(tid: str, pid: str) -> None:
        if pid in post[tid]:
            raise CompileError(f"duplicate arc {tid!r} -> {pid!r}")
        post[tid].add(pid)

    # Sink: several top-level end events all complete the case, so they
    # share one sink place.
    sink_pid = f"p_{top_ends[0]}" if len(top_ends) == 1 else "p__sink"
    place_of: dict[str, str] = {}

    or_splits: list[str] = []
    or_joins: list[str] = []
    for nid in sorted(nodes):
        node = nodes[nid]
        if node.kind in (START_EVENT, END_EVENT) or (
            node.kind == GATEWAY and node.gateway_kind == XOR
        ):
            if node.kind == END_EVENT and nid in top_ends:
                if sink_pid not in claimed:
                    add_place(sink_pid)
                place_of[nid] = sink_pid
            else:
                place_of[nid] = add_place(f"p_{nid}")
        elif node.kind == TASK:
            add_trans(f"t_{nid}", node.label.strip())
        elif node.kind == GATEWAY and node.gateway_kind == AND:
            add_trans(f"tau_{nid}", None)
        elif node.kind == GATEWAY and node.gateway_kind == OR:
            (or_splits if node.direction == SPLIT else or_joins).append(nid)
        else:  # pragma: no cover - parser admits no other kinds
            raise CompileError(f"unsupported node kind {node.kind!r} at {nid!r}")

    # Match each inclusive split to its join along the postdominator
    # chain, then expand both sides over branch subsets.
    join_of: dict[str, str] = {}
    if or_splits:
        pdom = _postdominators(nodes.keys(), succ)
        for split_id in or_splits:
            chain = sorted(pdom[split_id] - {split_id}, key=lambda x: (-len(pdom[x]), x))
            join_id = next((n for n in chain if n in or_joins), None)
            if join_id is None:
                raise CompileError(
                    f"inclusive split {split_id!r} has no matching inclusive join"
                )
            if join_id in join_of.values():
                other = next(s for s, j in join_of.items() if j == join_id)
                raise CompileError(
                    f"inclusive join {join_id!r} matched by both "
                    f"{other!r} and {split_id!r}"
                )
            join_of[split_id] = join_id
    unmatched = sorted(set(or_joins) - set(join_of.values()))
    if unmatched:
        raise CompileError(
            f"inclusive join(s) without a block-structured split: {', '.join(unmatched)}"
        )

    # Per-flow port places around inclusive gateways, filled in during
    # expansion and used by the generic flow wiring below.
    or_src_port: dict[str, str] = {}  # flow id -> place (flow leaves a gateway)
    or_dst_port: dict[str, str] = {}  # flow id -> place (flow enters a gateway)

    for split_id in or_splits:
        join_id = join_of[split_id]
        branches = sorted(flows_by_src[split_id], key=lambda f: f[0])
        k = len(branches)
        if k > or_branch_limit:
            raise CompileError(
                f"inclusive gateway {split_id!r} has {k} branches; the subset "
                f"expansion is capped at {or_branch_limit}"
            )
        inflows = sorted(flows_by_dst[join_id], key=lambda f: f[0])
        if len(inflows) != k:
            raise CompileError(
                f"inclusive block {split_id!r}/{join_id!r} is not block-structured: "
                f"{k} branches but {len(inflows)} join in-flows"
            )
        exit_of: dict[str, str] = {}
        for branch in branches:
            hits = _branch_exit_flows(flows_by_src, split_id, branch, join_id)
            if len(hits) != 1:
                raise CompileError(
                    f"branch {branch[0]!r} of inclusive split {split_id!r} reaches "
                    f"join {join_id!r} through {len(hits)} in-flows; expected exactly 1"
                )
            exit_of[branch[0]] = hits.pop()
        if len(set(exit_of.values())) != k:
            raise CompileError(
                f"branches of inclusive split {split_id!r} share join in-flows"
            )

        split_in = add_place(f"p_{split_id}__in")
        for inflow in sorted(flows_by_dst[split_id], key=lambda f: f[0]):
            or_dst_port[inflow[0]] = split_in
        join_out = add_place(f"p_{join_id}__out")
        for outflow in sorted(flows_by_src[join_id], key=lambda f: f[0]):
            or_src_port[outflow[0]] = join_out
        for branch in branches:
            or_src_port[branch[0]] = add_place(f"p_{split_id}__{branch[0]}")
        for inflow in inflows:
            or_dst_port[inflow[0]] = add_place(f"p_{join_id}__{inflow[0]}")

        for mask in range(1, 1 << k):
            mem = add_place(f"p_{split_id}__mem{mask}")
            t_split = add_trans(f"tau_{split_id}__s{mask}", None)
            arc_pt(split_in, t_split)
            arc_tp(t_split, mem)
            t_join = add_trans(f"tau_{join_id}__s{mask}", None)
            arc_pt(mem, t_join)
            arc_tp(t_join, join_out)
            for i, branch in enumerate(branches):
                if mask & (1 << i):
                    arc_tp(t_split, or_src_port[branch[0]])
                    arc_pt(or_dst_port[exit_of[branch[0]]], t_join)

    def src_side(flow: tuple[str, str, str]) -> tuple[str, str]:
        fid, src, _dst = flow
        if fid in or_src_port:
            return "p", or_src_port[fid]
        node = nodes[src]
        if src in place_of:
            return "p", place_of[src]
        if node.kind == TASK:
            return "t", f"t_{src}"
        return "t", f"tau_{src}"

    def dst_side(flow: tuple[str, str, str]) -> tuple[str, str]:
        fid, _src, dst = flow
        if fid in or_dst_port:
            return "p", or_dst_port[fid]
        node = nodes[dst]
        if dst in place_of:
            return "p", place_of[dst]
        if node.kind == TASK:
            return "t", f"t_{dst}"
        return "t", f"tau_{dst}"

    for flow in sorted(flows, key=lambda f: f[0]):
        skind, sid = src_side(flow)
        dkind, did = dst_side(flow)
        if skind == "p" and dkind == "p":
            tid = add_trans(f"tau_f_{flow[0]}", None)
            arc_pt(sid, tid)
            arc_tp(tid, did)
        elif skind == "p":
            arc_pt(sid, did)
        elif dkind == "p":
            arc_tp(sid, did)
        else:
            pid = add_place(f"p_f_{flow[0]}")
            arc_tp(sid, pid)
            arc_pt(pid, did)

    transitions = tuple(Transition(tid, trans[tid]) for tid in sorted(trans))
    return PetriNet(
        name=model.name or "net",
        places=tuple(sorted(places)),
        transitions=transitions,
        pre={tid: frozenset(pre[tid]) for tid in trans},
        post={tid: frozenset(post[tid]) for tid in trans},
        initial_marking=Marking({f"p_{top_start}": 1}),
        final_marking=Marking({sink_pid: 1}),
    )


# ---------------------------------------------------------------------------
# Structural checks


def check_workflow_net(net: PetriNet) -> tuple[str, ...]:
    """Diagnostics for the workflow-net shape; empty means pass.

    Checks a unique source place, a unique sink place, agreement with
    the declared markings, and that every place and transition lies on
    some path from source to sink.
    """
    problems: list[str] = []
    produced = set().union(*net.post.values()) if net.post else set()
    consumed = set().union(*net.pre.values()) if net.pre else set()
    sources = [p for p in net.places if p not in produced]
    sinks = [p for p in net.places if p not in consumed]
    if len(sources) != 1:
        problems.append(f"expected exactly 1 source place, found {len(sources)}: "
                        + ", ".join(sorted(sources)))
    if len(sinks) != 1:
        problems.append(f"expected exactly 1 sink place, found {len(sinks)}: "
                        + ", ".join(sorted(sinks)))
    if len(sources) == 1 and net.initial_marking != Marking({sources[0]: 1}):
        problems.append(
            f"initial marking {net.initial_marking} is not one token on {sources[0]}"
        )
    if len(sinks) == 1 and net.final_marking != Marking({sinks[0]: 1}):
        problems.append(
            f"final marking {net.final_marking} is not one token on {sinks[0]}"
        )
    if len(sources) != 1 or len(sinks) != 1:
        return tuple(problems)

    fwd_succ: dict[str, set[str]] = {n: set() for n in net.places}
    bwd_succ: dict[str, set[str]] = {n: set() for n in net.places}
    for t in net.transitions:
        fwd_succ[t.tid] = set(net.post[t.tid])
        bwd_succ[t.tid] = set(net.pre[t.tid])
        for p in net.pre[t.tid]:
            fwd_succ[p].add(t.tid)
        for p in net.post[t.tid]:
            bwd_succ[p].add(t.tid)

    def closure(start: str, adj: Mapping[str, set[str]]) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    on_path = closure(sources[0], fwd_succ) & closure(sinks[0], bwd_succ)
    every_node = set(net.places) | {t.tid for t in net.transitions}
    for node in sorted(every_node - on_path):
        problems.append(f"node {node} is not on any path from source to sink")
    return tuple(problems)


def find_silent_cycle(net: PetriNet) -> Optional[tuple[str, ...]]:
    """Return a cycle of silent transitions, or ``None`` if there is none.

    Two silent transitions are adjacent when one produces into a place
    the other consumes. The alignment search requires this graph to be
    acyclic, otherwise zero-cost loops could stall the cost frontier.
    """
    silent = [t.tid for t in net.transitions if t.is_silent]
    silent_set = set(silent)
    consumers: dict[str, list[str]] = {}
    for tid in silent:
        for p in net.pre[tid]:
            consumers.setdefault(p, []).append(tid)
    adj: dict[str, list[str]] = {}
    for tid in silent:
        nxt: set[str] = set()
        for p in net.post[tid]:
            nxt.update(c for c in consumers.get(p, ()) if c in silent_set)
        adj[tid] = sorted(nxt)

    color: dict[str, int] = {tid: 0 for tid in silent}  # 0 new, 1 open, 2 done
    trail: list[str] = []

    def dfs(start: str) -> Optional[tuple[str, ...]]:
        stack: list[tuple[str, Iterator[str]]] = [(start, iter(adj[start]))]
        color[start] = 1
        trail.append(start)
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == 0:
                    color[nxt] = 1
                    trail.append(nxt)
                    stack.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
                if color[nxt] == 1:
                    i = trail.index(nxt)
                    return tuple(trail[i:])
            if not advanced:
                color[node] = 2
                trail.pop()
                stack.pop()
        return None

    for tid in silent:
        if color[tid] == 0:
            cycle = dfs(tid)
            if cycle is not None:
                return cycle
    return None


# ---------------------------------------------------------------------------
# Playout


def random_playout(
    net: PetriNet,
    seed: int = 0,
    max_steps: int = 500,
    case_id: str = "case",
    start_date: date = date(2020, 1, 1),
) -> Trace:
    """One random walk from the initial to the final marking.

    Each step fires a uniformly random enabled transition. Silent
    transitions are not emitted. Event i is dated ``start_date + i``
    days, mirroring the day-granular logs the toolkit targets.

    Raises PlayoutDeadEnd when no transition is enabled or the step
    budget runs out before the final marking.
    """
    rng = random.Random(seed)
    marking = net.initial_marking
    labels: list[str] = []
    steps = 0
    while not net.is_final(marking):
        if steps >= max_steps:
            raise PlayoutDeadEnd(marking, steps, "step budget exhausted", case_id)
        candidates = net.enabled(marking)
        if not candidates:
            raise PlayoutDeadEnd(marking, steps, "no enabled transitions", case_id)
        tid = rng.choice(candidates)
        label = net.transition(tid).label
        if label is not None:
            labels.append(label)
        marking = net.fire(marking, tid)
        steps += 1
    events = tuple(
        Event(case_id, label, start_date + timedelta(days=i), i)
        for i, label in enumerate(labels)
    )
    return Trace(case_id, events)


# ---------------------------------------------------------------------------
# PNML export


def to_pnml(net: PetriNet, net_id: str = "net1") -> str:
    """Serialize the net as PNML with initial and final markings.

    Silent transitions carry the ``$invisible$`` toolspecific marker
    understood by the usual process-mining tool chain.
    """
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<pnml>',
        f'  <net id="{escape(net_id, {chr(34): "&quot;"})}" '
        'type="http://www.pnml.org/version-2009/grammar/ptnet">',
        f'    <name><text>{escape(net.name)}</text></name>',
        '    <page id="page1">',
    ]
    for pid in net.places:
        tokens = net.initial_marking.get(pid)
        if tokens:
            lines.append(f'      <place id="{escape(pid, {chr(34): "&quot;"})}">')
            lines.append(f'        <name><text>{escape(pid)}</text></name>')
            lines.append(f'        <initialMarking><text>{tokens}</text></initialMarking>')
            lines.append('      </place>')
        else:
            lines.append(f'      <place id="{escape(pid, {chr(34): "&quot;"})}">'
                         f'<name><text>{escape(pid)}</text></name></place>')
    for t in net.transitions:
        shown = t.label if t.label is not None else t.tid
        lines.append(f'      <transition id="{escape(t.tid, {chr(34): "&quot;"})}">')
        lines.append(f'        <name><text>{escape(shown)}</text></name>')
        if t.is_silent:
            lines.append('        <toolspecific tool="ProM" version="6.4" '
                         'activity="$invisible$"/>')
        lines.append('      </transition>')
    arcs: list[tuple[str, str]] = []
    for t in net.transitions:
        for p in sorted(net.pre[t.tid]):
            arcs.append((p, t.tid))
        for p in sorted(net.post[t.tid]):
            arcs.append((t.tid, p))
    for i, (src, dst) in enumerate(sorted(arcs), start=1):
        lines.append(f'      <arc id="a{i}" '
                     f'source="{escape(src, {chr(34): "&quot;"})}" '
                     f'target="{escape(dst, {chr(34): "&quot;"})}"/>')
    lines.append('    </page>')
    lines.append('    <finalmarkings>')
    lines.append('      <marking>')
    for pid, n in net.final_marking.items():
        lines.append(f'        <place idref="{escape(pid, {chr(34): "&quot;"})}">'
                     f'<text>{n}</text></place>')
    lines.append('      </marking>')
    lines.append('    </finalmarkings>')
    lines.append('  </net>')
    lines.append('</pnml>')
    return "\n".join(lines) + "\n"
