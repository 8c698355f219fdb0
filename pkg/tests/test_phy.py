import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_graph, random_links
from urllc_sched.assignment import SlotAssignment
from urllc_sched.netmodel import ConflictGraph, LinkSpec
from urllc_sched.oracle import dense_sinr
from urllc_sched.phy import (
    PhyConstants,
    from_db,
    interference_power,
    isolated_snr_db,
    noise_power,
    received_power,
    sinr,
    slot_sinr,
    to_db,
)


@pytest.mark.parametrize("d,expected", [(1.0, 1.0), (10.0, 1e-3), (2.0, 0.125)])
def test_received_power(d, expected):
    assert received_power(d, 3.0, 1.0) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_received_power_rejects_nonpositive_distance(d):
    with pytest.raises(ValueError):
        received_power(d, 3.0, 1.0)


def test_noise_power_values_and_linearity():
    n0 = noise_power(PhyConstants())
    assert abs(n0 - 8.004e-14) <= 1e-17
    assert noise_power(PhyConstants(temperature=580.0)) == 2 * n0
    assert noise_power(PhyConstants(bandwidth=1.0e7)) == n0 / 2


def test_phy_constants_validation():
    with pytest.raises(ValueError):
        PhyConstants(temperature=0.0)
    with pytest.raises(ValueError):
        PhyConstants(bandwidth=0.0)


def _victim_fixture():
    # victim rx at the origin, tx 1 m away; interferers' tx 2 m and 10 m from the victim rx
    links = [
        LinkSpec(0, (1.0, 0.0), (0.0, 0.0), 1, 10, 5, 0),
        LinkSpec(1, (0.0, 2.0), (0.0, 3.0), 1, 10, 5, 0),
        LinkSpec(2, (0.0, -10.0), (0.0, -11.0), 1, 10, 5, 0),
    ]
    graph = ConflictGraph.from_edges(3, [(0, 1), (0, 2)])
    return links, graph


def test_interference_examples():
    links, graph = _victim_fixture()
    alone = SlotAssignment.from_rb_lists(3, [[0], [1, 2]])
    assert interference_power(0, alone, graph, links, 0) == 0.0
    one = SlotAssignment.from_rb_lists(3, [[0, 1]])
    assert interference_power(0, one, graph, links, 0) == pytest.approx(0.125, rel=1e-15)
    two = SlotAssignment.from_rb_lists(3, [[0, 1, 2]])
    assert interference_power(0, two, graph, links, 0) == pytest.approx(0.126, rel=1e-12)


def test_sinr_examples():
    links, graph = _victim_fixture()
    iso = sinr(0, 0, SlotAssignment.from_rb_lists(3, [[0]]), graph, links)
    assert iso.linear == pytest.approx(1.2494e13, rel=1e-4)
    assert iso.db == pytest.approx(130.97, abs=0.01)
    hit = sinr(0, 0, SlotAssignment.from_rb_lists(3, [[0, 1]]), graph, links)
    assert hit.linear == pytest.approx(1 / (0.125 + 8.004e-14), rel=1e-12)
    assert hit.linear == pytest.approx(8.0, rel=1e-9)
    assert hit.db == pytest.approx(9.03, abs=0.01)
    moved = sinr(0, 0, SlotAssignment.from_rb_lists(3, [[0], [1]]), graph, links)
    assert moved.linear == iso.linear


def test_sinr_requires_active_victim():
    links, graph = _victim_fixture()
    with pytest.raises(ValueError):
        sinr(0, 0, SlotAssignment.from_rb_lists(3, [[1]]), graph, links)


def test_graph_scope_ignores_non_neighbours():
    links, _ = _victim_fixture()
    empty = ConflictGraph(np.zeros((3, 3), dtype=np.uint8))
    a = SlotAssignment.from_rb_lists(3, [[0, 1]])
    assert interference_power(0, a, empty, links, 0) == 0.0
    assert interference_power(0, a, empty, links, 0, scope="all") == pytest.approx(0.125)


def test_slot_report_min_and_mean_summary():
    links, graph = _victim_fixture()
    a = SlotAssignment.from_rb_lists(3, [[0, 1], [0]])
    lo = slot_sinr(a, graph, links, summary="min")
    mean = slot_sinr(a, graph, links, summary="mean")
    worst = lo.entry(0, 0).linear
    best = lo.entry(0, 1).linear
    assert lo.linear[0] == worst
    assert mean.linear[0] == pytest.approx((worst + best) / 2)
    assert np.isnan(lo.linear[2]) and list(lo.active) == [0, 1]
    assert lo.db[0] == pytest.approx(10 * math.log10(worst))


def test_isolated_snr():
    links, _ = _victim_fixture()
    snr = isolated_snr_db(links)
    assert snr[0] == pytest.approx(to_db(1.0 / 8.004e-14))


def _random_instance(rng):
    n = int(rng.integers(1, 21))
    links = random_links(n, rng)
    graph = random_graph(n, float(rng.uniform(0, 1)), rng)
    c = int(rng.integers(1, 4))
    rb_lists = [[] for _ in range(c)]
    for i in range(n):
        for rb in range(c):
            if rng.random() < 0.5:
                rb_lists[rb].append(i)
    return links, graph, rb_lists


@pytest.mark.parametrize("scope", ["graph", "all"])
def test_matches_dense_oracle(scope):
    rng = np.random.default_rng(11)
    for _ in range(50):
        links, graph, rb_lists = _random_instance(rng)
        a = SlotAssignment.from_rb_lists(len(links), rb_lists)
        ref = dense_sinr(links, rb_lists, graph.adjacency, scope=scope)
        for (i, rb), val in ref.items():
            got = sinr(i, rb, a, graph, links, scope=scope).linear
            assert abs(got - val) <= 1e-12 * abs(val)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["graph", "all"]))
def test_extra_interferer_strictly_lowers_sinr(seed, scope):
    rng = np.random.default_rng(seed)
    links = random_links(6, rng, side=5.0)
    graph = ConflictGraph(1 - np.eye(6, dtype=np.uint8))
    base = SlotAssignment.from_rb_lists(6, [[0, 1, 2]])
    more = SlotAssignment.from_rb_lists(6, [[0, 1, 2, 3]])
    assert sinr(0, 0, more, graph, links, scope=scope).linear < sinr(0, 0, base, graph, links, scope=scope).linear


@given(st.floats(-200.0, 200.0))
def test_db_round_trip(x_db):
    assert abs(float(to_db(from_db(x_db))) - x_db) <= 1e-9
    lin = float(from_db(x_db))
    assert abs(float(from_db(to_db(lin))) - lin) <= 1e-9 * lin
