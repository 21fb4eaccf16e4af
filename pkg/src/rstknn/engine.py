"""Branch-and-bound reverse spatio-textual k-NN traversal.

Three query modes share the bound machinery but differ in control flow:

* ``CORRECT`` — FIFO queue; each dequeued entry sheds itself/its parent from
  its inherited lists, adds itself when it is an index node (locality), then
  exchanges updates with every queued entry (completeness) before the
  accept/prune test runs.  A runtime assertion verifies that every list is
  complete at test time; survivors of the main loop are settled by exact
  point-to-point verification.
* ``FAULTY2011`` — a reproduction of the legacy priority-queue algorithm
  that never lets a node account for its own contents.  Intentionally
  unsound; kept as an executable regression of that failure mode.
* ``FAULTY2014`` — the later legacy variant that restored self-accounting
  but still accepts on upper bounds computed from incomplete lists.
  Intentionally unsound as well.

Every run records a trace: one event per dequeue plus one per verified
candidate, each with snapshots of the queue and the candidate/result/pruned
lists.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .core import NormStats, QueryObject, SimParams
from .iur_tree import Entry, IurTree, max_sim_st, object_entry
from .nn_lists import NNLists, Verdict, is_hit_or_drop


class Mode(str, Enum):
    CORRECT = "correct"
    FAULTY2011 = "faulty2011"
    FAULTY2014 = "faulty2014"


class CompletenessViolation(RuntimeError):
    """An accept/prune test was about to run on an incomplete list."""


@dataclass
class TraceEvent:
    """One row of the run log, mirroring the Steps/Actions/U/COL/ROL/PEL table."""

    step: int
    action: str
    u: list[str]
    col: list[str]
    rol: list[str]
    pel: list[str]

    def to_json_dict(self) -> dict:
        return {
            "step": self.step,
            "action": self.action,
            "U": self.u,
            "COL": self.col,
            "ROL": self.rol,
            "PEL": self.pel,
        }


@dataclass
class EngineAudit:
    """Counters and optional bound samples collected from a correct-mode run."""

    completeness_evaluations: int = 0
    completeness_failures: int = 0
    record_bounds: bool = False
    bound_records: list[tuple[Entry, float | None, float | None]] = field(default_factory=list)


@dataclass
class EngineState:
    """Mutable working state of one traversal; owned by a single run."""

    u: deque[Entry]
    col: list[Entry]
    rol: list[str]
    pel: list[Entry]
    lists: dict[Entry, NNLists]
    trace: list[TraceEvent]
    step: int = 0

    def snapshot(self, action: str) -> None:
        self.step += 1
        self.trace.append(
            TraceEvent(
                step=self.step,
                action=action,
                u=[e.label for e in self.u],
                col=[e.label for e in self.col],
                rol=list(self.rol),
                pel=[e.label for e in self.pel],
            )
        )


def subtree_objects(tree: IurTree, entry: Entry) -> list[str]:
    """All object ids under an entry, in id order."""
    return tree.subtree_objects(entry)


# -- correct mode -----------------------------------------------------------


def _assert_complete(lists: NNLists, audit: EngineAudit | None) -> None:
    if audit is not None:
        audit.completeness_evaluations += 1
    if not lists.is_complete():
        if audit is not None:
            audit.completeness_failures += 1
        raise CompletenessViolation(
            f"incomplete NN-list for {lists.owner.label} at decision time"
        )


def _checked_verdict(lists: NNLists, query: QueryObject, params: SimParams,
                     stats: NormStats, audit: EngineAudit | None) -> Verdict:
    _assert_complete(lists, audit)
    if audit is not None and audit.record_bounds:
        audit.bound_records.append(
            (lists.owner, lists.knn_lower(params.k), lists.knn_upper(params.k))
        )
    return is_hit_or_drop(lists, query, params, stats)


def _run_correct(tree: IurTree, query: QueryObject, params: SimParams,
                 stats: NormStats, audit: EngineAudit | None,
                 reverse_children: bool) -> EngineState:
    state = EngineState(u=deque(), col=[], rol=[], pel=[], lists={}, trace=[])
    root = tree.root_entry()
    state.u.append(root)
    state.lists[root] = NNLists(root, tree)

    while state.u:
        entry = state.u.popleft()
        action = f"Dequeue {entry.label}"
        lists = state.lists[entry]
        lists.strip_self_and_parent()
        if entry.is_node:
            lists.add_self(params, stats)
        for other in list(state.u):  # mutual effect with everything queued
            lists.update_with(other, params, stats)
            state.lists[other].update_with(entry, params, stats)
        verdict = _checked_verdict(lists, query, params, stats, audit)
        if verdict is Verdict.HIT:
            state.rol.extend(tree.subtree_objects(entry))
        elif verdict is Verdict.DROP:
            state.pel.append(entry)
        elif entry.is_node:
            children = tree.children(entry)
            if reverse_children:
                children = list(reversed(children))
            for child in children:
                state.lists[child] = NNLists.inherited(child, lists)
                state.u.append(child)
                action += f", Enqueue {child.label}"
        else:
            state.col.append(entry)
        state.snapshot(action)

    final_verification(state, tree, query, params, stats, audit=audit)
    return state


def final_verification(state: EngineState, tree: IurTree, query: QueryObject,
                       params: SimParams, stats: NormStats,
                       audit: EngineAudit | None = None) -> None:
    """Settle the candidates left after the main loop.

    Pruned entries are expanded to their contained points, and each candidate
    updates its lists with every other point (result, pruned, fellow
    candidates).  All bounds involved are then exact point similarities, so
    the accept/prune test is guaranteed decisive and the candidate list
    empties in one pass.
    """
    if not state.col:
        return
    pel_points: list[str] = sorted(
        {oid for e in state.pel for oid in tree.subtree_ids(e)}
    )
    for candidate in list(state.col):
        lists = state.lists[candidate]
        others = state.rol + pel_points + [
            c.ident for c in state.col if c != candidate  # type: ignore[misc]
        ]
        for oid in others:
            lists.update_with(object_entry(str(oid)), params, stats)
        verdict = _checked_verdict(lists, query, params, stats, audit)
        state.col.remove(candidate)
        if verdict is Verdict.HIT:
            state.rol.append(str(candidate.ident))
        elif verdict is Verdict.DROP:
            state.pel.append(candidate)
            pel_points.append(str(candidate.ident))
            pel_points.sort()
        else:  # pragma: no cover - impossible with exact point bounds
            raise RuntimeError(f"verification left {candidate.label} undecided")
        state.snapshot(f"Verify {candidate.label}")


# -- faulty legacy modes ------------------------------------------------------


class _PriorityQueue:
    """Max-priority queue over entries with deterministic tie-breaking."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, tuple[str, str], Entry]] = []
        self._live: set[Entry] = set()

    def push(self, entry: Entry, priority: float) -> None:
        heapq.heappush(self._heap, (-priority, entry.order_key, entry))
        self._live.add(entry)

    def pop(self) -> Entry:
        while True:
            _, _, entry = heapq.heappop(self._heap)
            if entry in self._live:
                self._live.discard(entry)
                return entry

    def discard(self, entry: Entry) -> None:
        self._live.discard(entry)

    def __contains__(self, entry: Entry) -> bool:
        return entry in self._live

    def __bool__(self) -> bool:
        return bool(self._live)

    def live_sorted(self) -> list[Entry]:
        seen = set()
        out = []
        for neg, key, entry in sorted(self._heap):
            if entry in self._live and entry not in seen:
                seen.add(entry)
                out.append(entry)
        return out


def _route(state: EngineState, tree: IurTree, entry: Entry, verdict: Verdict) -> None:
    if verdict is Verdict.HIT:
        state.rol.extend(tree.subtree_objects(entry))
    elif verdict is Verdict.DROP:
        state.pel.append(entry)


def _run_faulty(tree: IurTree, query: QueryObject, params: SimParams,
                stats: NormStats, *, locality: bool) -> EngineState:
    """Shared skeleton of the two legacy modes.

    ``locality=False`` reproduces the earlier algorithm (no self-addition at
    all); ``locality=True`` the later variant, which adds the node itself
    after the first test and drops the parent's own tuple when inheriting.
    Both order the queue by the optimistic query similarity and both use
    upper bounds without any completeness gate.
    """
    state = EngineState(u=deque(), col=[], rol=[], pel=[], lists={}, trace=[])
    queue = _PriorityQueue()
    root = tree.root_entry()
    state.lists[root] = NNLists(root, tree)
    queue.push(root, 0.0)

    def ungated(lists: NNLists) -> Verdict:
        return is_hit_or_drop(lists, query, params, stats, gated=False)

    while queue:
        parent = queue.pop()
        action = f"Dequeue {parent.label}"
        parent_lists = state.lists[parent]
        for child in tree.children(parent):
            lists = NNLists.inherited(child, parent_lists)
            if locality:
                lists.remove(parent)
            state.lists[child] = lists
            verdict = ungated(lists)
            if verdict is Verdict.UNDECIDED:
                if locality and child.is_node:
                    lists.add_self(params, stats)
                candidates = list(state.col) + [object_entry(o) for o in state.rol]
                candidates += queue.live_sorted()
                if locality:
                    # the later variant scans neighbors most-similar first
                    candidates.sort(
                        key=lambda e: (
                            -max_sim_st(tree, child, e, params, stats),
                            e.order_key,
                        )
                    )
                for other in candidates:
                    if other == child:
                        continue
                    lists.update_with(other, params, stats)
                    verdict = ungated(lists)
                    if verdict is not Verdict.UNDECIDED:
                        break
                    if other in queue or other in state.col:
                        other_lists = state.lists[other]
                        other_lists.update_with(child, params, stats)
                        other_verdict = ungated(other_lists)
                        if other_verdict is not Verdict.UNDECIDED:
                            queue.discard(other)
                            if other in state.col:
                                state.col.remove(other)
                            _route(state, tree, other, other_verdict)
            if verdict is Verdict.UNDECIDED:
                if child.is_node:
                    priority = max_sim_st(tree, child, query, params, stats)
                    queue.push(child, priority)
                    action += f", Enqueue {child.label}"
                else:
                    state.col.append(child)
            else:
                _route(state, tree, child, verdict)
        # keep the trace's U column consistent with the live queue
        state.u = deque(queue.live_sorted())
        state.snapshot(action)

    _faulty_final_verification(state, tree, query, params, stats)
    return state


def _faulty_final_verification(state: EngineState, tree: IurTree, query: QueryObject,
                               params: SimParams, stats: NormStats) -> None:
    """The legacy cleanup pass: feed pruned entries to the candidates.

    Entries come off the pruned list deepest-first and are replaced by their
    children, so candidates eventually see plain points.  The printed
    procedure can leave candidates undecided (there may be nothing pruned, or
    k may exceed the coverage any list can reach); those leftovers are
    settled against the result/candidate points, and an entry whose list
    still covers fewer than k neighbors is accepted, mirroring the convention
    that an object short of k competitors has the query among its k nearest.
    """
    def ungated(lists: NNLists) -> Verdict:
        return is_hit_or_drop(lists, query, params, stats, gated=False)

    working = list(state.pel)
    while state.col and working:
        working.sort(key=lambda e: (-tree.depth(e), e.order_key))
        entry = working.pop(0)
        for candidate in list(state.col):
            lists = state.lists[candidate]
            lists.update_with(entry, params, stats)
            verdict = ungated(lists)
            if verdict is not Verdict.UNDECIDED:
                state.col.remove(candidate)
                _route(state, tree, candidate, verdict)
                state.snapshot(f"Verify {candidate.label}")
        if entry.is_node:
            working.extend(tree.children(entry))
    for candidate in list(state.col):
        lists = state.lists[candidate]
        for other in state.rol + [c.ident for c in state.col if c != candidate]:
            lists.update_with(object_entry(str(other)), params, stats)
        verdict = ungated(lists)
        if verdict is Verdict.UNDECIDED:
            # fewer than k neighbors reachable: unconditional member
            verdict = Verdict.HIT
        state.col.remove(candidate)
        _route(state, tree, candidate, verdict)
        state.snapshot(f"Verify {candidate.label}")


# -- public entry points -------------------------------------------------------


def rstknn_query(tree: IurTree, query: QueryObject, params: SimParams,
                 mode: Mode = Mode.CORRECT, *, stats: NormStats | None = None,
                 audit: EngineAudit | None = None,
                 reverse_children: bool = False) -> tuple[set[str], list[TraceEvent]]:
    """Run a reverse spatio-textual k-NN query.

    Returns the result object ids and the recorded trace.  ``stats`` defaults
    to the tree's cached dataset statistics; pass them explicitly to share
    the exact same values with an external oracle.
    """
    if stats is None:
        stats = tree.norm_stats()
    if mode is Mode.CORRECT:
        state = _run_correct(tree, query, params, stats, audit, reverse_children)
    elif mode is Mode.FAULTY2011:
        state = _run_faulty(tree, query, params, stats, locality=False)
    elif mode is Mode.FAULTY2014:
        state = _run_faulty(tree, query, params, stats, locality=True)
    else:  # pragma: no cover
        raise ValueError(f"unknown mode {mode!r}")
    return set(state.rol), state.trace


def faulty2011_query(tree: IurTree, query: QueryObject, params: SimParams,
                     *, stats: NormStats | None = None) -> tuple[set[str], list[TraceEvent]]:
    """The legacy priority-queue algorithm without the locality condition."""
    return rstknn_query(tree, query, params, Mode.FAULTY2011, stats=stats)


def faulty2014_query(tree: IurTree, query: QueryObject, params: SimParams,
                     *, stats: NormStats | None = None) -> tuple[set[str], list[TraceEvent]]:
    """The legacy variant with locality restored but no completeness gate."""
    return rstknn_query(tree, query, params, Mode.FAULTY2014, stats=stats)


# -- trace serialization --------------------------------------------------------


_COLUMNS = ("Steps", "Actions", "U", "COL", "ROL", "PEL")


def format_trace_table(trace: list[TraceEvent]) -> str:
    """Plain-text table with columns Steps | Actions | U | COL | ROL | PEL."""
    rows = [
        (
            str(ev.step),
            ev.action,
            ", ".join(ev.u),
            ", ".join(ev.col),
            ", ".join(ev.rol),
            ", ".join(ev.pel),
        )
        for ev in trace
    ]
    widths = [
        max(len(_COLUMNS[i]), *(len(r[i]) for r in rows)) if rows else len(_COLUMNS[i])
        for i in range(len(_COLUMNS))
    ]
    lines = [" | ".join(c.ljust(widths[i]) for i, c in enumerate(_COLUMNS))]
    lines.append("-+-".join("-" * w for w in widths))
    for r in rows:
        lines.append(" | ".join(c.ljust(widths[i]) for i, c in enumerate(r)))
    return "\n".join(lines)


def trace_to_jsonl(trace: list[TraceEvent]) -> str:
    """One JSON object per line, one line per trace event."""
    return "\n".join(json.dumps(ev.to_json_dict()) for ev in trace)
