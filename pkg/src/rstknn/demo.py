"""A hand-built fixture that separates the three query modes.

Six objects in two groups: an isolated pair N1 = {P0, P1} near the origin
and a compact four-object cluster under N2 = {N3 = {P2, P3}, N4 = {P4, P5}},
with the query sitting between them, closer to the cluster's near edge.
The tree is intentionally unbalanced (N1 is a leaf directly under the root)
to match the shape such counterexamples are usually drawn with, which an STR
bulk load would never produce.

With alpha = 1 and k = 2:

* the true answer is {P0, P1}: the query is the second-nearest neighbor of
  both isolated points, while every cluster point already has two
  cluster-mates closer than the query;
* the mode without self-accounting accepts N2 outright at its first test —
  its only evidence is the far-away N1, so its two-neighbor upper bound is
  hopeless and the whole subtree lands in the result;
* the mode without the completeness gate accepts N3 while N3's list still
  knows nothing about its sibling N4.

The minimum pairwise distance is dist(P0, P1) = sqrt(50), about 7.07.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import QueryObject, STObject, SimParams, TermVector
from .iur_tree import IurTree, tree_from_layout

LAYOUT = [["P0", "P1"], [["P2", "P3"], ["P4", "P5"]]]

EXPECTED_RESULT = {"P0", "P1"}


@dataclass(frozen=True)
class DemoFixture:
    objects: tuple[STObject, ...]
    layout: list
    query: QueryObject
    params: SimParams

    def build_tree(self) -> IurTree:
        return tree_from_layout(list(self.objects), self.layout)


def two_cluster_fixture() -> DemoFixture:
    objects = (
        STObject("P0", (0.0, 0.0), TermVector({"cafe": 3.0})),
        STObject("P1", (5.0, 5.0), TermVector({"cafe": 2.0, "bar": 1.0})),
        STObject("P2", (42.0, 51.0), TermVector({"museum": 4.0})),
        STObject("P3", (51.0, 39.0), TermVector({"museum": 2.0, "park": 2.0})),
        STObject("P4", (52.0, 49.0), TermVector({"park": 5.0})),
        STObject("P5", (58.0, 55.0), TermVector({"bar": 2.0, "park": 1.0})),
    )
    query = QueryObject((36.0, 36.0), TermVector())
    return DemoFixture(
        objects=objects,
        layout=LAYOUT,
        query=query,
        params=SimParams(alpha=1.0, k=2),
    )
