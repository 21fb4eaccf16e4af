import pytest

import rstknn.iur_tree as iur_tree
import rstknn.oracle as oracle_mod
from rstknn.core import (
    QueryObject,
    STObject,
    SimParams,
    TermVector,
    compute_norm_stats,
    sim_st,
)
from rstknn.datasets import random_dataset, random_query
from rstknn.engine import Mode, rstknn_query
from rstknn.iur_tree import build_tree
from rstknn.oracle import (
    check_bound_sandwich,
    counterexample_search,
    ej_dominance_counterexample,
    kth_nn_sim,
    rknn_bruteforce,
)

NEG_INF = float("-inf")


def _two_objects():
    return [
        STObject("a", (0.0, 0.0), TermVector({"x": 1.0})),
        STObject("b", (5.0, 0.0), TermVector({"x": 2.0})),
    ]


def test_kth_nn_sim_two_objects():
    objs = _two_objects()
    stats = compute_norm_stats(objs)
    params = SimParams(alpha=0.5, k=1)
    assert kth_nn_sim(objs[0], objs, 1, params, stats) == sim_st(objs[0], objs[1], params, stats)


def test_kth_nn_sim_insufficient_neighbors():
    objs = _two_objects()
    stats = compute_norm_stats(objs)
    params = SimParams(alpha=0.5, k=2)
    assert kth_nn_sim(objs[0], objs, 2, params, stats) == NEG_INF
    with pytest.raises(ValueError):
        kth_nn_sim(objs[0], objs, 0, params, stats)


def test_kth_nn_sim_matches_full_sort(rng):
    objs = random_dataset(rng, 10, 5)
    stats = compute_norm_stats(objs)
    params = SimParams(alpha=0.4, k=3)
    for o in objs:
        row = sorted(
            (sim_st(o, other, params, stats) for other in objs if other.id != o.id),
            reverse=True,
        )
        assert kth_nn_sim(o, objs, 3, params, stats) == row[2]


def test_rknn_bruteforce_collinear():
    objs = [
        STObject("a", (0.0, 0.0), TermVector()),
        STObject("b", (1.0, 0.0), TermVector()),
        STObject("c", (10.0, 0.0), TermVector()),
    ]
    q = QueryObject((0.4, 0.0), TermVector())
    stats = compute_norm_stats(objs)
    assert rknn_bruteforce(objs, q, SimParams(alpha=1.0, k=1), stats) == {"a", "b"}


def test_rknn_bruteforce_tie_excludes():
    # query exactly as similar as the 1-NN: strict rule keeps the object out
    objs = [
        STObject("a", (0.0, 0.0), TermVector()),
        STObject("b", (4.0, 0.0), TermVector()),
        STObject("c", (8.0, 0.0), TermVector()),
    ]
    q = QueryObject((4.0, 0.0), TermVector())  # same distance from a as b is
    stats = compute_norm_stats(objs)
    result = rknn_bruteforce(objs, q, SimParams(alpha=1.0, k=1), stats)
    assert "a" not in result
    assert result == {"b"}  # b sits on the query point and beats its 1-NN outright


def test_alpha_shifts_membership():
    # spatially the answer is {P3, P4}; with text weighted in, P2 (textually
    # identical to the query, but sitting in a far cluster of unrelated
    # neighbors) joins the result
    objs = [
        STObject("P0", (10.0, 90.0), TermVector({"misc": 3.0})),
        STObject("P1", (10.0, 95.0), TermVector({"gear": 6.0})),
        STObject("P2", (100.0, 100.0), TermVector({"food": 5.0})),
        STObject("P3", (44.0, 50.0), TermVector({"food": 4.0})),
        STObject("P4", (56.0, 50.0), TermVector({"food": 4.0})),
        STObject("P5", (104.0, 100.0), TermVector({"stuff": 6.0})),
    ]
    q = QueryObject((50.0, 50.0), TermVector({"food": 5.0}))
    stats = compute_norm_stats(objs)
    spatial = rknn_bruteforce(objs, q, SimParams(alpha=1.0, k=2), stats)
    mixed = rknn_bruteforce(objs, q, SimParams(alpha=0.4, k=2), stats)
    assert spatial == {"P3", "P4"}
    assert mixed == {"P2", "P3", "P4"}
    # the tree traversal agrees at both settings
    tree = build_tree(objs, 2)
    for params, want in ((SimParams(1.0, 2), spatial), (SimParams(0.4, 2), mixed)):
        got, _ = rstknn_query(tree, q, params, stats=stats)
        assert got == want


def test_rknn_bruteforce_permutation_invariant(rng):
    objs = random_dataset(rng, 12, 5)
    q = random_query(rng, 5)
    stats = compute_norm_stats(objs)
    params = SimParams(alpha=0.7, k=2)
    base = rknn_bruteforce(objs, q, params, stats)
    for _ in range(5):
        shuffled = objs[:]
        rng.shuffle(shuffled)
        assert rknn_bruteforce(shuffled, q, params, stats) == base


def test_check_bound_sandwich_singleton_leaves_tight():
    objs = _two_objects()
    tree = iur_tree.tree_from_layout(objs, [["a"], ["b"]])
    stats = tree.norm_stats()
    report = check_bound_sandwich(tree, SimParams(alpha=0.5, k=1), stats)
    assert report.ok and report.node_pairs > 0


def test_check_bound_sandwich_random_tree_clean(rng):
    objs = random_dataset(rng, 64, 6)
    tree = build_tree(objs, 4)
    stats = tree.norm_stats()
    q = random_query(rng, 6)
    report = check_bound_sandwich(tree, SimParams(alpha=0.4, k=2), stats, query=q)
    assert report.ok
    assert report.query_pairs == len(tree.nodes)


def test_check_bound_sandwich_detects_corruption(rng, monkeypatch):
    # negative control: a deliberately broken upper text bound must be caught
    objs = random_dataset(rng, 32, 6)
    tree = build_tree(objs, 4)
    stats = tree.norm_stats()
    real = iur_tree.max_text_sim

    def corrupted(tree_, a, b):
        return real(tree_, a, b) * 0.2

    monkeypatch.setattr(oracle_mod, "max_text_sim", corrupted)
    report = check_bound_sandwich(tree, SimParams(alpha=0.0, k=1), stats)
    assert not report.ok


def test_ej_dominance_counterexample_stands():
    assert ej_dominance_counterexample() is True


def test_ej_dominance_counterexample_survives_scaling():
    # doubling all weights changes the similarities but not the ordering flip
    from rstknn.core import extended_jaccard, fdim_ratio

    p, p1, p2 = (200.0, 60.0), (2.0, 80.0), (2.0, 100.0)
    assert all(fdim_ratio(a, b) >= fdim_ratio(a, c) for a, b, c in zip(p, p1, p2))
    u = TermVector({"d0": p[0], "d1": p[1]})
    v1 = TermVector({"d0": p1[0], "d1": p1[1]})
    v2 = TermVector({"d0": p2[0], "d1": p2[1]})
    assert extended_jaccard(u, v1) < extended_jaccard(u, v2)


def test_ej_dominance_degenerate_equal_vectors_do_not_contradict():
    # p' == p'': dominance holds with equality and no strict EJ flip exists
    from rstknn.core import extended_jaccard

    u = TermVector({"d0": 100.0, "d1": 30.0})
    v = TermVector({"d0": 1.0, "d1": 40.0})
    assert not extended_jaccard(u, v) < extended_jaccard(u, v)


def test_counterexample_search_finds_faulty_fixtures():
    for mode, seed in ((Mode.FAULTY2011, 42), (Mode.FAULTY2014, 1042)):
        fx = counterexample_search(mode, seed=seed, trials=300)
        assert fx is not None, f"no counterexample for {mode.value}"
        assert fx.mode_result != fx.oracle_result
        # re-run from the recorded fixture to confirm it reproduces
        tree = build_tree(fx.objects, fx.fanout)
        stats = tree.norm_stats()
        got, _ = rstknn_query(tree, fx.query, fx.params, mode, stats=stats)
        assert got == fx.mode_result
        assert rknn_bruteforce(fx.objects, fx.query, fx.params, stats) == fx.oracle_result
        correct, _ = rstknn_query(tree, fx.query, fx.params, stats=stats)
        assert correct == fx.oracle_result


def test_counterexample_search_correct_mode_control():
    assert counterexample_search(Mode.CORRECT, seed=42, trials=150) is None


def test_counterexample_search_validates_trials():
    with pytest.raises(ValueError):
        counterexample_search(Mode.FAULTY2011, seed=1, trials=0)
