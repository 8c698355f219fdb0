import numpy as np
import pytest

from helpers import random_graph
from urllc_sched.netmodel import ConflictGraph, LinkSpec
from urllc_sched.oracle import (
    brute_force_mwis,
    dense_sinr,
    exhaustive_best_slot,
    finite_difference_grad,
    q_value_iteration,
)


def test_mwis_examples():
    tri = ConflictGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    r = brute_force_mwis(tri, [3, 2, 1])
    assert r.best_set == (0,) and r.best_value == 3 and r.count == 4
    path = ConflictGraph.from_edges(3, [(0, 1), (1, 2)])
    assert brute_force_mwis(path, [1, 5, 1]).best_set == (1,)
    empty = np.zeros((4, 4), dtype=np.uint8)
    r = brute_force_mwis(empty, [1, 2, 3, 4])
    assert r.best_set == (0, 1, 2, 3) and r.best_value == 10 and r.count == 16


def test_mwis_tie_break_and_guard():
    path = ConflictGraph.from_edges(3, [(0, 1), (1, 2)])
    assert brute_force_mwis(path, [1, 2, 1]).best_set == (0, 2)
    assert brute_force_mwis(ConflictGraph.from_edges(2, [(0, 1)]), [1, 1]).best_set == (0,)
    with pytest.raises(ValueError):
        brute_force_mwis(np.zeros((25, 25)), np.ones(25))


def test_mwis_relabelling_invariant():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(1, 11))
        g = random_graph(n, 0.4, rng)
        w = rng.random(n)
        perm = rng.permutation(n)
        a = brute_force_mwis(g, w)
        b = brute_force_mwis(g.permuted(perm), w[perm])
        assert a.best_value == pytest.approx(b.best_value, rel=1e-15)
        assert g.is_independent(a.best_set)
        assert sorted(perm[list(b.best_set)]) == sorted(a.best_set) or a.best_value == pytest.approx(b.best_value)


def _link(i, tx, rx):
    return LinkSpec(i, tx, rx, 1, 10, 5, 0)


def test_exhaustive_slot_examples():
    one = [_link(0, (0.0, 0.0), (1.0, 0.0))]
    a, val, _ = exhaustive_best_slot(one, np.zeros((1, 1)), 1)
    assert a.links_on(0) == [0] and val > 0

    strong, weak = _link(0, (0.0, 0.0), (1.0, 0.0)), _link(1, (0.0, 2.0), (3.0, 2.0))
    a, _, _ = exhaustive_best_slot([strong, weak], ConflictGraph.from_edges(2, [(0, 1)]), 1)
    assert a.links_on(0) == [0]

    far = [_link(0, (0.0, 0.0), (1.0, 0.0)), _link(1, (500.0, 0.0), (501.0, 0.0))]
    for scope in ("graph", "all"):
        a, _, _ = exhaustive_best_slot(far, np.zeros((2, 2)), 2, scope=scope)
        assert sorted(a.rbs_of(0) + a.rbs_of(1)) == [0, 1]


def test_exhaustive_slot_guard():
    many = [_link(i, (10.0 * i, 0.0), (10.0 * i + 1, 0.0)) for i in range(11)]
    with pytest.raises(ValueError):
        exhaustive_best_slot(many, np.zeros((11, 11)), 1)


def test_dense_sinr_isolated():
    out = dense_sinr([_link(0, (0.0, 0.0), (1.0, 0.0))], [[0]], np.zeros((1, 1)))
    assert out[(0, 0)] == pytest.approx(1 / 8.004e-14)


def test_finite_difference_examples():
    assert finite_difference_grad(lambda w: w * w, 3.0) == pytest.approx(6.0, abs=1e-6)
    assert finite_difference_grad(lambda w: 4.0, 3.0) == 0.0
    assert finite_difference_grad(lambda w: 5 * w, 3.0) == pytest.approx(5.0, rel=1e-9)
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(finite_difference_grad(lambda v: float(np.sum(v**2)), x), 2 * x, atol=1e-6)
    with pytest.raises(ValueError):
        finite_difference_grad(lambda w: w, 1.0, h=0.0)


def test_value_iteration_chain():
    # one state looping on itself with reward 1
    q = q_value_iteration([[0]], [[1.0]], [[False]], 0.5)
    assert q[0, 0] == pytest.approx(2.0)
