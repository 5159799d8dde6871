"""Cost-optimal alignments between traces and a compiled workflow net.

The search runs uniform-cost search (Dijkstra) over the synchronous
product of net and trace: a state is a pair (marking, trace position),
moves are synchronous, model, or log steps. No heuristic is used; this
keeps the engine a transparent baseline that the brute-force oracle in
this module can certify on small instances.

Fitness follows the usual cost-based normalization: a trace of length n
is compared against the worst case of n log moves plus the cheapest
all-model path through the net.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from itertools import count
from typing import Optional

from .event_log import EventLog, Trace
from .petri import Marking, PetriNet, find_silent_cycle

SYNC = "sync"
LOG = "log"
MODEL_VISIBLE = "model_visible"
MODEL_SILENT = "model_silent"

# Exploration preference among equal-cost frontier entries.
_RANK = {SYNC: 0, MODEL_SILENT: 1, MODEL_VISIBLE: 2, LOG: 3}

DEFAULT_STATE_BUDGET = 1_000_000


class AlignmentError(Exception):
    """An internal alignment invariant was violated."""


class UnsoundModelError(Exception):
    """The final marking cannot be reached by model moves alone."""


class AlignmentResourceError(Exception):
    """The search exceeded its state budget."""

    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"alignment search exceeded the state budget of {budget}")


class OracleInconclusive(Exception):
    """The brute-force oracle could not certify an optimal cost."""


@dataclass(frozen=True)
class CostScheme:
    """Move costs; the standard setting is 1/1/0/0."""

    log_move_cost: float = 1.0
    visible_model_move_cost: float = 1.0
    silent_model_move_cost: float = 0.0
    sync_move_cost: float = 0.0

    def __post_init__(self) -> None:
        if self.log_move_cost <= 0 or self.visible_model_move_cost <= 0:
            raise ValueError("log and visible model move costs must be positive")
        if self.sync_move_cost != 0 or self.silent_model_move_cost != 0:
            raise ValueError("sync and silent model move costs must be zero")


@dataclass(frozen=True)
class Move:
    kind: str
    label: str
    event_index: Optional[int]
    transition_id: Optional[str]
    cost: float

    def __post_init__(self) -> None:
        if self.kind == SYNC:
            ok = self.event_index is not None and self.transition_id is not None
        elif self.kind == LOG:
            ok = self.event_index is not None and self.transition_id is None
        elif self.kind in (MODEL_VISIBLE, MODEL_SILENT):
            ok = self.event_index is None and self.transition_id is not None
        else:
            raise ValueError(f"unknown move kind {self.kind!r}")
        if self.kind == MODEL_SILENT:
            ok = ok and not self.label
        else:
            ok = ok and bool(self.label)
        if not ok:
            raise ValueError(f"{self.kind} move with inconsistent fields: {self}")


@dataclass(frozen=True)
class Alignment:
    moves: tuple[Move, ...]
    total_cost: float
    trace_fitness: float

    def __post_init__(self) -> None:
        if abs(sum(m.cost for m in self.moves) - self.total_cost) > 1e-9:
            raise ValueError("total_cost does not match the move costs")
        if not 0.0 <= self.trace_fitness <= 1.0:
            raise ValueError(f"trace_fitness {self.trace_fitness} outside [0, 1]")


@dataclass(frozen=True)
class ConformanceResult:
    """Alignments for a whole log plus both fitness aggregates.

    ``log_fitness_average`` is the mean of per-trace fitness values;
    ``log_fitness_cost_based`` normalizes summed costs by summed
    denominators. Either is ``None`` when no trace could be aligned.
    Per-trace resource failures are listed in ``failures`` and excluded
    from the aggregates.
    """

    per_trace: tuple[tuple[str, Alignment], ...]
    log_fitness_average: Optional[float]
    log_fitness_cost_based: Optional[float]
    failures: tuple[tuple[str, str], ...] = ()
    case_count: int = 0
    event_count: int = 0
    variant_count: int = 0
    net_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for value in (self.log_fitness_average, self.log_fitness_cost_based):
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"fitness aggregate {value} outside [0, 1]")


# ---------------------------------------------------------------------------
# Search engine


class _IndexedNet:
    """Integer-indexed view of a net for the inner search loop."""

    __slots__ = ("net", "trans", "m0", "mf")

    def __init__(self, net: PetriNet):
        self.net = net
        pidx = {pid: i for i, pid in enumerate(net.places)}
        # (tid, label, pre indices, post indices), ordered by tid
        self.trans = tuple(
            (t.tid, t.label,
             tuple(sorted(pidx[p] for p in net.pre[t.tid])),
             tuple(sorted(pidx[p] for p in net.post[t.tid])))
            for t in net.transitions
        )
        self.m0 = self._key(net.initial_marking, pidx)
        self.mf = self._key(net.final_marking, pidx)

    @staticmethod
    def _key(marking: Marking, pidx: dict[str, int]) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((pidx[p], n) for p, n in marking.items()))

    @staticmethod
    def fire(key: tuple[tuple[int, int], ...], pre: tuple[int, ...],
             post: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
        counts = dict(key)
        for p in pre:
            left = counts[p] - 1
            if left:
                counts[p] = left
            else:
                del counts[p]
        for p in post:
            counts[p] = counts.get(p, 0) + 1
        return tuple(sorted(counts.items()))


def _trace_labels(trace: Trace) -> tuple[str, ...]:
    return tuple(e.activity.strip() for e in trace.events)


def _run_search(
    inet: _IndexedNet,
    labels: tuple[str, ...],
    costs: CostScheme,
    state_budget: int,
) -> tuple[float, tuple[Move, ...]]:
    """Uniform-cost search over (marking, position) states.

    Ties on cost are broken by move preference sync > model_silent >
    model_visible > log, then by transition id, which makes the returned
    alignment deterministic. States are deduplicated by best known cost;
    a cheaper re-entry re-expands.
    """
    n = len(labels)
    start = (inet.m0, 0)
    # entries holds (parent entry index, Move) for path reconstruction
    entries: list[tuple[int, Optional[Move]]] = [(-1, None)]
    best: dict[tuple, float] = {start: 0.0}
    ticket = count()
    heap: list[tuple] = [(0.0, 0, "", next(ticket), inet.m0, 0, 0)]
    pops = 0

    def push(g: float, rank: int, tid: str, marking, pos: int,
             parent: int, move: Move) -> None:
        state = (marking, pos)
        known = best.get(state)
        if known is not None and g >= known:
            return
        best[state] = g
        entries.append((parent, move))
        heapq.heappush(heap, (g, rank, tid, next(ticket), marking, pos, len(entries) - 1))

    while heap:
        g, _rank, _tid, _tick, marking, pos, eid = heapq.heappop(heap)
        if g > best.get((marking, pos), float("inf")):
            continue
        if pos == n and marking == inet.mf:
            moves: list[Move] = []
            while eid > 0:
                parent, move = entries[eid]
                moves.append(move)
                eid = parent
            moves.reverse()
            return g, tuple(moves)
        if pops >= state_budget:
            raise AlignmentResourceError(state_budget)
        pops += 1

        counts = dict(marking)
        for tid, label, pre, post in inet.trans:
            if any(counts.get(p, 0) < 1 for p in pre):
                continue
            fired = inet.fire(marking, pre, post)
            if label is None:
                push(g + costs.silent_model_move_cost, _RANK[MODEL_SILENT], tid,
                     fired, pos, eid,
                     Move(MODEL_SILENT, "", None, tid, costs.silent_model_move_cost))
            else:
                push(g + costs.visible_model_move_cost, _RANK[MODEL_VISIBLE], tid,
                     fired, pos, eid,
                     Move(MODEL_VISIBLE, label, None, tid, costs.visible_model_move_cost))
                if pos < n and label == labels[pos]:
                    push(g + costs.sync_move_cost, _RANK[SYNC], tid,
                         fired, pos + 1, eid,
                         Move(SYNC, label, pos, tid, costs.sync_move_cost))
        if pos < n:
            push(g + costs.log_move_cost, _RANK[LOG], "",
                 marking, pos + 1, eid,
                 Move(LOG, labels[pos], pos, None, costs.log_move_cost))

    raise UnsoundModelError(
        "the final marking is unreachable; the net is not sound"
    )


def _guard_silent_cycles(net: PetriNet) -> None:
    cycle = find_silent_cycle(net)
    if cycle is not None:
        raise AlignmentError(
            "net contains a cycle of silent transitions "
            f"({' -> '.join(cycle)}); the search assumes none"
        )


def min_model_path_cost(
    net: PetriNet,
    costs: CostScheme = CostScheme(),
    state_budget: int = DEFAULT_STATE_BUDGET,
) -> float:
    """Cost of the cheapest all-model path from initial to final marking."""
    cost, _moves = _run_search(_IndexedNet(net), (), costs, state_budget)
    return cost


def _verify_alignment(net: PetriNet, labels: tuple[str, ...], moves: tuple[Move, ...],
                      total_cost: float) -> None:
    """Check both projection invariants; raises AlignmentError on a bug."""
    if abs(sum(m.cost for m in moves) - total_cost) > 1e-9:
        raise AlignmentError("internal: move costs do not sum to total_cost")
    event_indices = [m.event_index for m in moves if m.kind in (SYNC, LOG)]
    if event_indices != list(range(len(labels))):
        raise AlignmentError(
            f"internal: event projection {event_indices} is not 0..{len(labels) - 1}"
        )
    marking = net.initial_marking
    for m in moves:
        if m.kind == LOG:
            continue
        marking = net.fire(marking, m.transition_id)
        if m.kind == SYNC and net.transition(m.transition_id).label != m.label:
            raise AlignmentError(f"internal: sync move label mismatch on {m}")
    if not net.is_final(marking):
        raise AlignmentError("internal: model projection does not reach the final marking")


def _fitness(total_cost: float, n_events: int, model_cost: float,
             costs: CostScheme) -> float:
    denominator = n_events * costs.log_move_cost + model_cost
    if denominator == 0:
        return 1.0
    return 1.0 - total_cost / denominator


def optimal_alignment(
    net: PetriNet,
    trace: Trace,
    costs: CostScheme = CostScheme(),
    state_budget: int = DEFAULT_STATE_BUDGET,
    model_cost: Optional[float] = None,
) -> Alignment:
    """Minimal-cost alignment of one trace against the net.

    Labels absent from the net are legal and end up as log moves.
    ``model_cost`` may carry a precomputed cheapest-model-path cost to
    avoid recomputing it per trace.
    """
    _guard_silent_cycles(net)
    inet = _IndexedNet(net)
    labels = _trace_labels(trace)
    if model_cost is None:
        model_cost, _ = _run_search(inet, (), costs, state_budget)
    total, moves = _run_search(inet, labels, costs, state_budget)
    _verify_alignment(net, labels, moves, total)
    return Alignment(moves, total, _fitness(total, len(labels), model_cost, costs))


def brute_force_alignment(
    net: PetriNet,
    trace: Trace,
    costs: CostScheme = CostScheme(),
    depth_bound: Optional[int] = None,
) -> Alignment:
    """Independent oracle: exhaustive depth-bounded enumeration.

    Explores every legal move sequence to (final marking, trace end),
    pruning only on cost against the best complete alignment so far.
    If any path was cut by the depth bound while still cheaper than the
    best alignment found, optimality cannot be certified and
    OracleInconclusive is raised. Intended for small nets only.
    """
    _guard_silent_cycles(net)
    labels = _trace_labels(trace)
    if depth_bound is None:
        depth_bound = len(labels) + 4 * len(net.transitions) + 4
    n = len(labels)
    by_tid = sorted(net.transitions, key=lambda t: t.tid)

    best_cost: Optional[float] = None
    best_moves: Optional[tuple[Move, ...]] = None
    min_clipped: Optional[float] = None

    def successors(marking: Marking, pos: int):
        """Candidate moves in deterministic preference order."""
        enabled = [t for t in by_tid if all(marking.get(p) for p in net.pre[t.tid])]
        for t in enabled:
            if pos < n and t.label == labels[pos]:
                yield (Move(SYNC, t.label, pos, t.tid, costs.sync_move_cost),
                       net.fire(marking, t.tid), pos + 1)
        for t in enabled:
            if t.label is None:
                yield (Move(MODEL_SILENT, "", None, t.tid, costs.silent_model_move_cost),
                       net.fire(marking, t.tid), pos)
        for t in enabled:
            if t.label is not None:
                yield (Move(MODEL_VISIBLE, t.label, None, t.tid,
                            costs.visible_model_move_cost),
                       net.fire(marking, t.tid), pos)
        if pos < n:
            yield (Move(LOG, labels[pos], pos, None, costs.log_move_cost),
                   marking, pos + 1)

    path: list[Move] = []
    on_path: set[tuple[Marking, int]] = set()

    def dfs(marking: Marking, pos: int, cost: float) -> None:
        nonlocal best_cost, best_moves, min_clipped
        if best_cost is not None and cost >= best_cost:
            return
        if pos == n and net.is_final(marking):
            best_cost = cost
            best_moves = tuple(path)
            return
        if len(path) >= depth_bound:
            min_clipped = cost if min_clipped is None else min(min_clipped, cost)
            return
        state = (marking, pos)
        if state in on_path:
            return
        on_path.add(state)
        for move, next_marking, next_pos in successors(marking, pos):
            path.append(move)
            dfs(next_marking, next_pos, cost + move.cost)
            path.pop()
        on_path.discard(state)

    dfs(net.initial_marking, 0, 0.0)
    if best_cost is None:
        raise OracleInconclusive(
            f"no complete alignment within depth bound {depth_bound}"
        )
    if min_clipped is not None and min_clipped < best_cost:
        raise OracleInconclusive(
            f"a path cheaper than {best_cost} was cut by depth bound {depth_bound}"
        )
    _verify_alignment(net, labels, best_moves, best_cost)
    model_cost = min_model_path_cost(net, costs)
    return Alignment(best_moves, best_cost, _fitness(best_cost, n, model_cost, costs))


# ---------------------------------------------------------------------------
# Log-level conformance


def align_log(
    net: PetriNet,
    log: EventLog,
    costs: CostScheme = CostScheme(),
    state_budget: int = DEFAULT_STATE_BUDGET,
) -> ConformanceResult:
    """Align every trace; one search per variant, replicated to members.

    Per-variant resource errors become per-case failures and do not
    abort the batch; an unsound net aborts immediately.
    """
    _guard_silent_cycles(net)
    inet = _IndexedNet(net)

    groups: dict[tuple[str, ...], list[str]] = {}
    for case_id in sorted(log.traces):
        groups.setdefault(_trace_labels(log.traces[case_id]), []).append(case_id)

    aligned: dict[str, Alignment] = {}
    failures: list[tuple[str, str]] = []
    try:
        model_cost, _ = _run_search(inet, (), costs, state_budget)
    except AlignmentResourceError as exc:
        # without the cheapest model path no fitness can be normalized,
        # so every case fails rather than the whole batch aborting
        failures = [(cid, str(exc)) for cid in sorted(log.traces)]
        return ConformanceResult(
            per_trace=(),
            log_fitness_average=None,
            log_fitness_cost_based=None,
            failures=tuple(failures),
            case_count=log.case_count,
            event_count=log.event_count,
            variant_count=len(groups),
            net_labels=net.visible_labels(),
        )
    for labels in sorted(groups):
        case_ids = groups[labels]
        try:
            total, moves = _run_search(inet, labels, costs, state_budget)
        except AlignmentResourceError as exc:
            failures.extend((cid, str(exc)) for cid in case_ids)
            continue
        _verify_alignment(net, labels, moves, total)
        alignment = Alignment(moves, total, _fitness(total, len(labels), model_cost, costs))
        for cid in case_ids:
            aligned[cid] = alignment

    per_trace = tuple((cid, aligned[cid]) for cid in sorted(aligned))
    if per_trace:
        average = sum(a.trace_fitness for _, a in per_trace) / len(per_trace)
        total_cost = sum(a.total_cost for _, a in per_trace)
        total_denominator = sum(
            len([m for m in a.moves if m.kind in (SYNC, LOG)]) * costs.log_move_cost
            + model_cost
            for _, a in per_trace
        )
        cost_based = (
            1.0 - total_cost / total_denominator if total_denominator else 1.0
        )
    else:
        average = None
        cost_based = None
    return ConformanceResult(
        per_trace=per_trace,
        log_fitness_average=average,
        log_fitness_cost_based=cost_based,
        failures=tuple(sorted(failures)),
        case_count=log.case_count,
        event_count=log.event_count,
        variant_count=len(groups),
        net_labels=net.visible_labels(),
    )


# ---------------------------------------------------------------------------
# Serialization


def moves_tsv(alignment: Alignment) -> str:
    """One move per line: kind, label, event index, transition id, cost.

    Empty labels and absent indices/ids are rendered as a hyphen; costs
    use the shortest exact decimal form.
    """
    lines = []
    for m in alignment.moves:
        lines.append("\t".join([
            m.kind,
            m.label if m.label else "-",
            str(m.event_index) if m.event_index is not None else "-",
            m.transition_id if m.transition_id is not None else "-",
            f"{m.cost:g}",
        ]))
    return "\n".join(lines) + ("\n" if lines else "")


def result_to_json(result: ConformanceResult) -> str:
    """Deterministic JSON rendering of a ConformanceResult."""

    def move_obj(m: Move) -> dict:
        return {
            "kind": m.kind,
            "label": m.label,
            "event_index": m.event_index,
            "transition_id": m.transition_id,
            "cost": m.cost,
        }

    payload = {
        "log_fitness_average": result.log_fitness_average,
        "log_fitness_cost_based": result.log_fitness_cost_based,
        "case_count": result.case_count,
        "event_count": result.event_count,
        "variant_count": result.variant_count,
        "net_labels": list(result.net_labels),
        "failures": [{"case_id": c, "reason": r} for c, r in result.failures],
        "per_trace": [
            {
                "case_id": case_id,
                "total_cost": a.total_cost,
                "trace_fitness": a.trace_fitness,
                "moves": [move_obj(m) for m in a.moves],
            }
            for case_id, a in result.per_trace
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
