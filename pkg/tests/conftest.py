"""Shared helpers for the test suite."""

from __future__ import annotations

import random

import pytest

from rstknn import SimParams, build_tree
from rstknn.datasets import random_dataset, random_query


def make_instance(seed: int, *, max_n: int = 64, min_n: int = 2,
                  k_max: int = 4, fanouts=(2, 4)):
    """One seeded random problem instance: (objects, tree, query, params, stats)."""
    rng = random.Random(seed)
    n = rng.randint(min_n, max_n)
    vocab = rng.randint(1, 8)
    objects = random_dataset(rng, n, vocab)
    query = random_query(rng, vocab)
    params = SimParams(alpha=rng.choice([0.0, 0.4, 0.7, 1.0]), k=rng.randint(1, k_max))
    tree = build_tree(objects, rng.choice(list(fanouts)))
    return objects, tree, query, params, tree.norm_stats()


@pytest.fixture
def rng():
    return random.Random(20240817)
