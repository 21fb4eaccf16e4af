"""Hierarchical spatio-textual index.

An R-tree over object locations where every node additionally stores an
intersection vector (per-term minimum weight over the contained objects),
a union vector (per-term maximum weight) and the object count.  Those three
ingredients, together with the node MBRs, yield sound lower/upper bounds on
the similarity between any two groups of objects.

Trees are immutable after construction; any number of concurrent queries may
share one tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import (
    NormStats,
    Point,
    QueryObject,
    STObject,
    SimParams,
    TermVector,
    combined_similarity,
    compute_norm_stats,
)


class EmptyDataset(ValueError):
    """A tree needs at least one object."""


@dataclass(frozen=True)
class Mbr:
    """Axis-aligned minimum bounding rectangle (possibly degenerate)."""

    lo: Point
    hi: Point

    def __post_init__(self) -> None:
        if self.lo[0] > self.hi[0] or self.lo[1] > self.hi[1]:
            raise ValueError(f"inverted Mbr: {self.lo} > {self.hi}")

    @classmethod
    def from_point(cls, p: Point) -> "Mbr":
        return cls(p, p)

    @classmethod
    def from_points(cls, points: Sequence[Point]) -> "Mbr":
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        return cls((min(xs), min(ys)), (max(xs), max(ys)))

    @classmethod
    def union(cls, boxes: Sequence["Mbr"]) -> "Mbr":
        return cls(
            (min(b.lo[0] for b in boxes), min(b.lo[1] for b in boxes)),
            (max(b.hi[0] for b in boxes), max(b.hi[1] for b in boxes)),
        )

    @property
    def center(self) -> Point:
        return ((self.lo[0] + self.hi[0]) / 2.0, (self.lo[1] + self.hi[1]) / 2.0)

    def contains_point(self, p: Point) -> bool:
        return self.lo[0] <= p[0] <= self.hi[0] and self.lo[1] <= p[1] <= self.hi[1]


def min_dist(a: Mbr, b: Mbr) -> float:
    """Minimum L2 distance between any point of a and any point of b."""
    dx = max(a.lo[0] - b.hi[0], b.lo[0] - a.hi[0], 0.0)
    dy = max(a.lo[1] - b.hi[1], b.lo[1] - a.hi[1], 0.0)
    return math.hypot(dx, dy)


def max_dist(a: Mbr, b: Mbr) -> float:
    """Maximum L2 distance between any point of a and any point of b.

    Attained at a corner pair; per axis the larger one-sided separation is
    always nonnegative because boxes have nonnegative extent.
    """
    dx = max(a.hi[0] - b.lo[0], b.hi[0] - a.lo[0])
    dy = max(a.hi[1] - b.lo[1], b.hi[1] - a.lo[1])
    return math.hypot(dx, dy)


@dataclass(frozen=True)
class Entry:
    """A traversal unit: either an index node or a single data object."""

    kind: str  # "node" | "object"
    ident: int | str

    @property
    def is_node(self) -> bool:
        return self.kind == "node"

    @property
    def is_object(self) -> bool:
        return self.kind == "object"

    @property
    def label(self) -> str:
        return f"N{self.ident}" if self.kind == "node" else str(self.ident)

    @property
    def order_key(self) -> tuple[str, str]:
        """Deterministic total order used for tie-breaking."""
        if self.kind == "node":
            return ("n", f"{self.ident:012d}")
        return ("o", str(self.ident))


def node_entry(node_id: int) -> Entry:
    return Entry("node", node_id)


def object_entry(object_id: str) -> Entry:
    return Entry("object", object_id)


@dataclass
class IurNode:
    """One index node.

    Invariants (checked by the test suite, relied on everywhere):
      * ``mbr`` is tight over the subtree's object locations;
      * for every contained object o and term t:
        int_vct[t] <= o.vct[t] <= union_vct[t] (absent terms read as 0);
      * ``count`` equals the number of objects in the subtree.
    """

    node_id: int
    mbr: Mbr
    int_vct: TermVector
    union_vct: TermVector
    count: int
    child_ids: tuple[int, ...]   # empty for leaves
    object_ids: tuple[str, ...]  # empty for internal nodes
    parent_id: int | None
    depth: int

    @property
    def is_leaf(self) -> bool:
        return not self.child_ids


def _intersect_vectors(vectors: Sequence[TermVector]) -> TermVector:
    """Coordinatewise minimum, treating absent terms as zero.

    A term survives only if it appears in every vector.
    """
    if not vectors:
        return TermVector()
    common = set(vectors[0].terms())
    for v in vectors[1:]:
        common &= set(v.terms())
    return TermVector({t: min(v.weight(t) for v in vectors) for t in common})


def _union_vectors(vectors: Sequence[TermVector]) -> TermVector:
    """Coordinatewise maximum over all vectors."""
    merged: dict[str, float] = {}
    for v in vectors:
        for t, w in v.items:
            if w > merged.get(t, 0.0):
                merged[t] = w
    return TermVector(merged)


Layout = list  # nested lists; a leaf is a list of object-id strings


class IurTree:
    """Immutable index over a dataset of :class:`STObject`."""

    def __init__(self, objects: Sequence[STObject], nodes: dict[int, IurNode], root_id: int):
        self.objects: dict[str, STObject] = {o.id: o for o in objects}
        self.nodes = nodes
        self.root_id = root_id
        self.all_object_ids: frozenset[str] = frozenset(self.objects)
        self._object_leaf: dict[str, int] = {}
        self._subtree_ids: dict[int, frozenset[str]] = {}
        self._point_mbrs: dict[str, Mbr] = {
            o.id: Mbr.from_point(o.loc) for o in objects
        }
        self._stats: NormStats | None = None
        for node in nodes.values():
            for oid in node.object_ids:
                self._object_leaf[oid] = node.node_id
        self._fill_subtree_ids(root_id)
        # preorder object intervals: containment decides ancestry in O(1)
        self._node_span: dict[int, tuple[int, int]] = {}
        self._object_span: dict[str, tuple[int, int]] = {}
        self._fill_spans(root_id, 0)

    def _fill_spans(self, node_id: int, start: int) -> int:
        node = self.nodes[node_id]
        cursor = start
        if node.is_leaf:
            for oid in node.object_ids:
                self._object_span[oid] = (cursor, cursor + 1)
                cursor += 1
        else:
            for child in node.child_ids:
                cursor = self._fill_spans(child, cursor)
        self._node_span[node_id] = (start, cursor)
        return cursor

    def _span(self, entry: Entry) -> tuple[int, int]:
        if entry.is_node:
            return self._node_span[entry.ident]
        return self._object_span[entry.ident]

    def _fill_subtree_ids(self, node_id: int) -> frozenset[str]:
        node = self.nodes[node_id]
        if node.is_leaf:
            ids = frozenset(node.object_ids)
        else:
            ids = frozenset().union(*(self._fill_subtree_ids(c) for c in node.child_ids))
        self._subtree_ids[node_id] = ids
        return ids

    # -- basic accessors ---------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.objects)

    def root_entry(self) -> Entry:
        return node_entry(self.root_id)

    def object(self, object_id: str) -> STObject:
        return self.objects[object_id]

    def objects_sorted(self) -> list[STObject]:
        return [self.objects[i] for i in sorted(self.objects)]

    def children(self, entry: Entry) -> list[Entry]:
        """Child entries of an index node, in stored order."""
        node = self.nodes[entry.ident]
        if node.is_leaf:
            return [object_entry(o) for o in node.object_ids]
        return [node_entry(c) for c in node.child_ids]

    def parent(self, entry: Entry) -> Entry | None:
        if entry.is_object:
            return node_entry(self._object_leaf[entry.ident])
        pid = self.nodes[entry.ident].parent_id
        return None if pid is None else node_entry(pid)

    def count(self, entry: Entry) -> int:
        return self.nodes[entry.ident].count if entry.is_node else 1

    def depth(self, entry: Entry) -> int:
        if entry.is_node:
            return self.nodes[entry.ident].depth
        return self.nodes[self._object_leaf[entry.ident]].depth + 1

    def mbr(self, entry: Entry) -> Mbr:
        if entry.is_node:
            return self.nodes[entry.ident].mbr
        return self._point_mbrs[entry.ident]

    def subtree_ids(self, entry: Entry) -> frozenset[str]:
        if entry.is_node:
            return self._subtree_ids[entry.ident]
        return frozenset((entry.ident,))

    def subtree_objects(self, entry: Entry) -> list[str]:
        """All object ids under the entry, in id order."""
        return sorted(self.subtree_ids(entry))

    def is_ancestor_or_equal(self, a: Entry, b: Entry) -> bool:
        """True when a's subtree contains b's (a == b or a an ancestor of b).

        Decided by preorder-interval containment, so a chain node holding a
        single child compares equal to that child; for everything built on
        this predicate only point-set containment matters, which is exactly
        what the intervals encode.
        """
        alo, ahi = self._span(a)
        blo, bhi = self._span(b)
        return alo <= blo and bhi <= ahi

    def overlaps(self, a: Entry, b: Entry) -> bool:
        """Tree overlap: the entries share at least one object."""
        alo, ahi = self._span(a)
        blo, bhi = self._span(b)
        return (alo <= blo and bhi <= ahi) or (blo <= alo and ahi <= bhi)

    def iter_node_entries(self) -> Iterator[Entry]:
        for nid in sorted(self.nodes):
            yield node_entry(nid)

    def norm_stats(self) -> NormStats:
        """Dataset normalization stats, computed once and cached.

        A single-object dataset has no pairs; every constant works there, so
        the degenerate all-zero stats are used (both score components then
        collapse to the constant 1).
        """
        if self._stats is None:
            if self.size < 2:
                self._stats = NormStats(0.0, 0.0, 0.0, 0.0)
            else:
                self._stats = compute_norm_stats(self.objects_sorted())
        return self._stats


# -- construction ----------------------------------------------------------


def _validate_objects(objects: Sequence[STObject]) -> None:
    if not objects:
        raise EmptyDataset("cannot build a tree over zero objects")
    seen: set[str] = set()
    for o in objects:
        if o.id in seen:
            raise ValueError(f"duplicate object id {o.id!r}")
        seen.add(o.id)


def _tile(items: list, fanout: int) -> list[list]:
    """One level of Sort-Tile-Recursive packing.

    ``items`` are (x, y, tiebreak, payload) records; returns groups of at
    most ``fanout`` payloads.  Fully deterministic: ties fall back to the
    tiebreak key.
    """
    n = len(items)
    groups_needed = math.ceil(n / fanout)
    slices = math.ceil(math.sqrt(groups_needed))
    slice_size = slices * fanout
    by_x = sorted(items, key=lambda r: (r[0], r[1], r[2]))
    groups: list[list] = []
    for s in range(0, n, slice_size):
        vertical = sorted(by_x[s : s + slice_size], key=lambda r: (r[1], r[0], r[2]))
        for g in range(0, len(vertical), fanout):
            groups.append([r[3] for r in vertical[g : g + fanout]])
    return groups


def _str_layout(objects: Sequence[STObject], fanout: int) -> Layout:
    """Nested id layout produced by a Sort-Tile-Recursive bulk load."""
    if len(objects) <= fanout:
        return [o.id for o in sorted(objects, key=lambda o: (o.loc[0], o.loc[1], o.id))]
    locs = {o.id: o.loc for o in objects}

    def layout_box(layout: Layout) -> Mbr:
        return Mbr.from_points([locs[i] for i in _layout_ids(layout)])

    records = [(o.loc[0], o.loc[1], o.id, o.id) for o in objects]
    level: list[tuple[float, float, str, Layout]] = []
    for group in _tile(records, fanout):
        box = layout_box(group)
        level.append((box.center[0], box.center[1], min(group), group))
    # repeatedly pack the current level until a single root remains
    while len(level) > 1:
        packed = _tile(level, fanout)
        level = []
        for group in packed:
            box = Mbr.union([layout_box(g) for g in group])
            level.append((box.center[0], box.center[1], min(_layout_ids(group)), group))
    return level[0][3]


def _layout_ids(layout: Layout) -> list[str]:
    if all(isinstance(x, str) for x in layout):
        return list(layout)
    out: list[str] = []
    for sub in layout:
        out.extend(_layout_ids(sub))
    return out


def tree_from_layout(objects: Sequence[STObject], layout: Layout) -> IurTree:
    """Build a tree with an explicitly given nesting.

    A layout is a nested list structure whose leaves are lists of object-id
    strings.  Node ids are assigned in preorder (root gets 0), so a layout
    ``[["P0","P1"], [["P2","P3"], ["P4","P5"]]]`` yields nodes N0 (root),
    N1 = {P0,P1}, N2, N3 = {P2,P3}, N4 = {P4,P5}.  Used for hand-crafted
    fixtures whose shape an STR bulk load would not reproduce.
    """
    _validate_objects(objects)
    by_id = {o.id: o for o in objects}
    placed = _layout_ids(layout)
    if sorted(placed) != sorted(by_id):
        raise ValueError("layout must mention each object id exactly once")

    nodes: dict[int, IurNode] = {}
    counter = iter(range(len(placed) * 2 + 1))

    def build(sub: Layout, parent_id: int | None, depth: int) -> IurNode:
        nid = next(counter)
        if all(isinstance(x, str) for x in sub):
            members = [by_id[i] for i in sub]
            node = IurNode(
                node_id=nid,
                mbr=Mbr.from_points([o.loc for o in members]),
                int_vct=_intersect_vectors([o.vct for o in members]),
                union_vct=_union_vectors([o.vct for o in members]),
                count=len(members),
                child_ids=(),
                object_ids=tuple(sub),
                parent_id=parent_id,
                depth=depth,
            )
        else:
            children = [build(c, nid, depth + 1) for c in sub]
            node = IurNode(
                node_id=nid,
                mbr=Mbr.union([c.mbr for c in children]),
                int_vct=_intersect_vectors([c.int_vct for c in children]),
                union_vct=_union_vectors([c.union_vct for c in children]),
                count=sum(c.count for c in children),
                child_ids=tuple(c.node_id for c in children),
                object_ids=(),
                parent_id=parent_id,
                depth=depth,
            )
        nodes[nid] = node
        return node

    root = build(layout, None, 0)
    return IurTree(list(objects), nodes, root.node_id)


def build_tree(objects: Sequence[STObject], fanout: int = 4) -> IurTree:
    """Sort-Tile-Recursive bulk load over the object locations."""
    _validate_objects(objects)
    if fanout < 2:
        raise ValueError(f"fanout must be >= 2, got {fanout}")
    return tree_from_layout(objects, _str_layout(objects, fanout))


# -- group-level similarity bounds ------------------------------------------


def _view(tree: IurTree, x: Entry | STObject | QueryObject) -> tuple[Mbr, TermVector, TermVector]:
    """(mbr, intersection vector, union vector) of a tree entry or bare object.

    A single object is a degenerate node: point MBR, both vectors equal to
    its term vector.  This gives every bound computation one code path.
    """
    if isinstance(x, Entry):
        if x.is_node:
            node = tree.nodes[x.ident]
            return node.mbr, node.int_vct, node.union_vct
        obj = tree.objects[x.ident]
        return tree._point_mbrs[x.ident], obj.vct, obj.vct
    return Mbr.from_point(x.loc), x.vct, x.vct


def _min_text(ia: TermVector, ua: TermVector, ib: TermVector, ub: TermVector) -> float:
    if ua.is_empty and ub.is_empty:
        return 0.0
    num = ia.dot(ib)
    den = ua.norm_sq + ub.norm_sq - num
    return max(0.0, min(1.0, num / den))


def _max_text(ia: TermVector, ua: TermVector, ib: TermVector, ub: TermVector) -> float:
    if ua.is_empty and ub.is_empty:
        return 0.0
    num = ua.dot(ub)
    den = ia.norm_sq + ib.norm_sq - num
    if den <= 0.0:
        return 1.0
    return max(0.0, min(1.0, num / den))


def min_text_sim(tree: IurTree, a: Entry | STObject | QueryObject,
                 b: Entry | STObject | QueryObject) -> float:
    """Lower bound on the Extended Jaccard between any pair drawn from a and b.

    Smallest defensible numerator (intersection vectors) over largest
    denominator (union vectors).  Zero when both unions are empty.
    """
    _, ia, ua = _view(tree, a)
    _, ib, ub = _view(tree, b)
    return _min_text(ia, ua, ib, ub)


def max_text_sim(tree: IurTree, a: Entry | STObject | QueryObject,
                 b: Entry | STObject | QueryObject) -> float:
    """Upper bound on the Extended Jaccard between any pair drawn from a and b.

    Largest numerator (union vectors) over smallest defensible denominator
    (intersection vectors).  Sparse intersections can drive that denominator
    to zero or below; 1 is then the (always valid) answer.  Two all-empty
    groups score 0, matching :func:`rstknn.core.extended_jaccard` so that
    point entries collapse exactly.
    """
    _, ia, ua = _view(tree, a)
    _, ib, ub = _view(tree, b)
    return _max_text(ia, ua, ib, ub)


def min_sim_st(tree: IurTree, a: Entry | STObject | QueryObject,
               b: Entry | STObject | QueryObject,
               params: SimParams, stats: NormStats) -> float:
    """Lower bound on sim_st over all pairs from a x b (worst distance
    combined with worst text similarity)."""
    ma, ia, ua = _view(tree, a)
    mb, ib, ub = _view(tree, b)
    return combined_similarity(max_dist(ma, mb), _min_text(ia, ua, ib, ub), params, stats)


def max_sim_st(tree: IurTree, a: Entry | STObject | QueryObject,
               b: Entry | STObject | QueryObject,
               params: SimParams, stats: NormStats) -> float:
    """Upper bound on sim_st over all pairs from a x b."""
    ma, ia, ua = _view(tree, a)
    mb, ib, ub = _view(tree, b)
    return combined_similarity(min_dist(ma, mb), _max_text(ia, ua, ib, ub), params, stats)


def pair_sim_bounds(tree: IurTree, a: Entry | STObject | QueryObject,
                    b: Entry | STObject | QueryObject,
                    params: SimParams, stats: NormStats) -> tuple[float, float]:
    """(lower, upper) sim_st bounds computed with one pass over the views."""
    ma, ia, ua = _view(tree, a)
    mb, ib, ub = _view(tree, b)
    lower = combined_similarity(max_dist(ma, mb), _min_text(ia, ua, ib, ub), params, stats)
    upper = combined_similarity(min_dist(ma, mb), _max_text(ia, ua, ib, ub), params, stats)
    return lower, upper
