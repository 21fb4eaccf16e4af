"""Per-entry neighbor-contribution lists and the accept/prune test.

An entry's NN-lists record, for a set of pairwise non-overlapping tree
entries, how many neighbor slots each one accounts for (``m``) together with
lower/upper similarity bounds.  Walking the tuples in decreasing bound order
and accumulating ``m`` yields under/over-estimates of the similarity to the
k-th nearest neighbor of any point inside the owner.

Two safety rules are load-bearing here and deliberately asymmetric:

* Under-coverage is tolerated: it only makes bounds unavailable, and a
  missing bound can never cause a wrong decision.
* Over-coverage is forbidden: counting a point twice inflates the lower
  cumulative walk and can trigger a false prune.  Therefore an update with
  entry B first removes every tuple whose entry is a proper ancestor of B.

The upper-bound walk is additionally gated on completeness: it is only
meaningful when every database object is accounted for, which is exactly the
condition the legacy algorithms failed to maintain.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import NormStats, QueryObject, SimParams
from .iur_tree import Entry, IurTree, max_sim_st, min_sim_st, pair_sim_bounds

NEG_INF = float("-inf")


class Verdict(Enum):
    HIT = "hit"
    DROP = "drop"
    UNDECIDED = "undecided"


class NotInternalNode(ValueError):
    """Self-addition only applies to index nodes, never to single objects."""


@dataclass
class NNTuple:
    entry: Entry
    m: int
    min_sim: float
    max_sim: float


class NNLists:
    """Keyed tuple store with two derived sorted views.

    One store backs both the pessimistic (lower) and optimistic (upper)
    views, so the two can never disagree on membership.  View ordering ties
    are broken by entry id, keeping traces deterministic.
    """

    def __init__(self, owner: Entry, tree: IurTree):
        self.owner = owner
        self.tree = tree
        self._tuples: dict[Entry, NNTuple] = {}
        self._lower: list[NNTuple] | None = None
        self._upper: list[NNTuple] | None = None

    def _invalidate(self) -> None:
        self._lower = None
        self._upper = None

    def __len__(self) -> int:
        return len(self._tuples)

    def __contains__(self, entry: Entry) -> bool:
        return entry in self._tuples

    def get(self, entry: Entry) -> NNTuple | None:
        return self._tuples.get(entry)

    def tuples(self) -> list[NNTuple]:
        return list(self._tuples.values())

    def _m_for(self, entry: Entry) -> int:
        count = self.tree.count(entry)
        return count - 1 if self.tree.overlaps(entry, self.owner) else count

    # -- mutations ----------------------------------------------------------

    def add_self(self, params: SimParams, stats: NormStats) -> None:
        """Insert the owner itself so its own points count as candidates.

        The lower bound pairs the MBR diagonal with the worst group text
        similarity; the upper bound pairs distance zero with the best.
        """
        if not self.owner.is_node:
            raise NotInternalNode(f"cannot add_self on object entry {self.owner.label}")
        lo, hi = pair_sim_bounds(self.tree, self.owner, self.owner, params, stats)
        self._tuples[self.owner] = NNTuple(
            entry=self.owner,
            m=self.tree.count(self.owner) - 1,
            min_sim=lo,
            max_sim=hi,
        )
        self._invalidate()

    def update_with(self, other: Entry, params: SimParams, stats: NormStats) -> None:
        """Upsert a tuple for ``other`` with directly computed bounds.

        Any tuple whose entry is a proper ancestor of ``other`` is removed
        first: keeping both would double-count the ancestor's points, and a
        double-counted lower list can prune entries that belong in the
        result.
        """
        if other == self.owner:
            raise ValueError("an entry never contributes to its own list via update")
        stale = [
            e for e in self._tuples
            if e != other and self.tree.is_ancestor_or_equal(e, other)
        ]
        for e in stale:
            del self._tuples[e]
        lo, hi = pair_sim_bounds(self.tree, self.owner, other, params, stats)
        self._tuples[other] = NNTuple(entry=other, m=self._m_for(other), min_sim=lo, max_sim=hi)
        self._invalidate()

    @classmethod
    def inherited(cls, child: Entry, parent_lists: "NNLists") -> "NNLists":
        """Deep-copy the parent's tuples for a child entry.

        Bounds are inherited verbatim (any bound over the parent's point set
        bounds the child's subset, just more loosely); the slot counts are
        recomputed against the new owner's overlap.
        """
        lists = cls(child, parent_lists.tree)
        for t in parent_lists._tuples.values():
            lists._tuples[t.entry] = NNTuple(
                entry=t.entry,
                m=lists._m_for(t.entry),
                min_sim=t.min_sim,
                max_sim=t.max_sim,
            )
        return lists

    def strip_self_and_parent(self) -> None:
        """Drop the owner's own tuple and its parent's, if present."""
        doomed = [self.owner]
        parent = self.tree.parent(self.owner)
        if parent is not None:
            doomed.append(parent)
        changed = False
        for e in doomed:
            if e in self._tuples:
                del self._tuples[e]
                changed = True
        if changed:
            self._invalidate()

    def remove(self, entry: Entry) -> None:
        if entry in self._tuples:
            del self._tuples[entry]
            self._invalidate()

    # -- derived views and bounds --------------------------------------------

    def lower_view(self) -> list[NNTuple]:
        if self._lower is None:
            self._lower = sorted(
                self._tuples.values(), key=lambda t: (-t.min_sim, t.entry.order_key)
            )
        return self._lower

    def upper_view(self) -> list[NNTuple]:
        if self._upper is None:
            self._upper = sorted(
                self._tuples.values(), key=lambda t: (-t.max_sim, t.entry.order_key)
            )
        return self._upper

    def coverage(self) -> int:
        return sum(t.m for t in self._tuples.values())

    def covered_object_ids(self) -> set[str]:
        covered: set[str] = set()
        for e in self._tuples:
            covered |= self.tree.subtree_ids(e)
        return covered

    def is_complete(self) -> bool:
        """Every database object is accounted for.

        A node owner must cover even its own points (normally through its
        self-tuple or an ancestor).  A point owner is its own 0th nearest
        neighbor, so only the other N-1 objects need covering.
        """
        missing = self.tree.all_object_ids - self.covered_object_ids()
        if not missing:
            return True
        return self.owner.is_object and missing == {self.owner.ident}

    def knn_lower(self, k: int) -> float | None:
        """Lower bound on the k-th-neighbor similarity of any owned point.

        Walks the pessimistic view accumulating slots; absent when the list
        covers fewer than k neighbors (no bound is available, which is safe).
        """
        cumulative = 0
        for t in self.lower_view():
            cumulative += t.m
            if cumulative >= k:
                return t.min_sim
        return None

    def knn_upper(self, k: int) -> float | None:
        """Upper bound on the k-th-neighbor similarity of any owned point.

        Only defined for complete lists.  If the whole database holds fewer
        than k neighbors for the owner's points, the k-th neighbor does not
        exist and the bound is -inf, which makes such entries unconditional
        members of the result.
        """
        if not self.is_complete():
            return None
        cumulative = 0
        for t in self.upper_view():
            cumulative += t.m
            if cumulative >= k:
                return t.max_sim
        return NEG_INF

    def knn_upper_ungated(self, k: int) -> float | None:
        """The upper walk without the completeness gate.

        This is exactly the unsound shortcut the legacy query modes take; it
        exists so those modes can reproduce their published behavior.
        """
        cumulative = 0
        for t in self.upper_view():
            cumulative += t.m
            if cumulative >= k:
                return t.max_sim
        return None

    # -- test support ---------------------------------------------------------

    def check_invariants(self) -> None:
        """Assert the structural invariants; used by the test suite."""
        entries = list(self._tuples)
        n = len(self.tree.all_object_ids)
        assert self.coverage() <= n - 1, "over-coverage: sum(m) exceeds N - 1"
        for t in self._tuples.values():
            count = self.tree.count(t.entry)
            assert 0 <= t.m <= count
            if self.tree.overlaps(t.entry, self.owner):
                assert t.m == count - 1, "overlapping entry must give up one slot"
            assert t.min_sim <= t.max_sim + 1e-12
        for i, a in enumerate(entries):
            for b in entries[i + 1 :]:
                assert not self.tree.overlaps(a, b), (
                    f"overlapping tuples {a.label} / {b.label}"
                )


def is_hit_or_drop(lists: NNLists, query: QueryObject, params: SimParams,
                   stats: NormStats, *, gated: bool = True) -> Verdict:
    """Sufficient accept/prune test for the list's owner against the query.

    Drop when even the optimistic owner-query similarity cannot beat the
    pessimistic k-th-neighbor bound (ties drop: database points win them).
    Hit when the pessimistic owner-query similarity strictly beats the
    optimistic k-th-neighbor bound.  Otherwise undecided.

    ``gated=False`` computes the upper bound without the completeness gate;
    only the deliberately faulty legacy modes use it.
    """
    tree = lists.tree
    k = params.k
    lower = lists.knn_lower(k)
    if lower is not None and max_sim_st(tree, lists.owner, query, params, stats) <= lower:
        return Verdict.DROP
    upper = lists.knn_upper(k) if gated else lists.knn_upper_ungated(k)
    if upper is not None and min_sim_st(tree, lists.owner, query, params, stats) > upper:
        return Verdict.HIT
    return Verdict.UNDECIDED
