import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import brute_conductance, brute_precision
from streampart.core import (CapacityError, MetricError, MetricsReport, PartitionState, PlacementError,
                             conductance, cut_edges, default_capacity, evaluate, fraction_cut,
                             imbalance, pair_precision)
from streampart.ppm import PlantedConfig, generate
from streampart.streams import EdgeList


def test_place_updates_sizes_and_membership():
    st_ = PartitionState(10, 3)
    st_.place(0, 0)
    assert st_.sizes.tolist() == [1, 0, 0]
    assert st_.contains(0, 0) and not st_.contains(1, 0)


def test_capacity_and_double_placement():
    st_ = PartitionState(4, 2, capacity=2)
    st_.place(0, 1)
    st_.place(1, 1)
    with pytest.raises(CapacityError):
        st_.place(2, 1)
    with pytest.raises(PlacementError):
        st_.place(0, 0)
    with pytest.raises(PlacementError):
        st_.place(3, 5)
    with pytest.raises(PlacementError):
        PartitionState(10, 3, capacity=3)


@given(st.integers(2, 300), st.integers(2, 9), st.data())
def test_full_placement_under_capacity_is_balanced(n, k, data):
    st_ = PartitionState(n, k)
    for v in range(n):
        open_ = [m for m in range(k) if st_.has_room(m)]
        st_.place(v, data.draw(st.sampled_from(open_)))
    assert st_.complete
    if k == 2:
        assert abs(int(st_.sizes[0]) - int(st_.sizes[1])) <= 1
    assert imbalance(st_) <= 1.0 * (1 + k / n) + 1e-12


def test_default_capacity():
    assert default_capacity(10, 4) == 3
    assert default_capacity(2000, 2) == 1000
    assert default_capacity(10, 4, 1.2) == 3


def test_fraction_cut_small_cases():
    cycle = EdgeList.from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert fraction_cut(np.zeros(4, int), cycle) == 0.0
    assert fraction_cut(np.array([0, 1, 0, 1]), cycle) == 1.0
    with pytest.raises(MetricError):
        fraction_cut(np.array([0, -1, 0, 1]), cycle)
    with pytest.raises(MetricError):
        fraction_cut(np.zeros(4, int), EdgeList(4, np.empty((0, 2))))


def test_fraction_cut_of_ground_truth():
    n, p, q = 1000, 0.5, 0.1
    expected = q * n * n / 4 / (q * n * n / 4 + p * 2 * math.comb(n // 2, 2))
    assert expected == pytest.approx(0.1675, abs=1e-3)  # 0.16694 exactly
    lams = []
    for s in range(20):
        edges, truth = generate(PlantedConfig(n, 2, p, q, graph_seed=s))
        lams.append(fraction_cut(truth.psi, edges))
        assert fraction_cut(truth.psi, edges) + (1 - lams[-1]) == 1.0
    lams = np.array(lams)
    assert abs(lams.mean() - expected) <= 3 * lams.std(ddof=1) / math.sqrt(20) + 1e-4


def test_imbalance_examples():
    assert imbalance([5, 5]) == 1.0
    assert imbalance([8, 0, 0, 0]) == 4.0
    assert imbalance([3, 3, 2, 2], 10) == pytest.approx(1.2)


def test_pair_precision_examples():
    labels = np.repeat([0, 1], 50)
    assert pair_precision(labels, labels) == 1.0
    assert pair_precision(np.zeros(100, int), labels) == pytest.approx(2450 / 4950)
    rng = np.random.default_rng(0)
    a, b = rng.integers(0, 3, 8), rng.integers(0, 2, 8)
    assert pair_precision(a, b) == pytest.approx(brute_precision(a, b), abs=1e-12)
    with pytest.raises(MetricError):
        pair_precision([0], [0])


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 3)), min_size=2, max_size=30),
       st.permutations(range(5)))
def test_pair_precision_matches_brute_force_and_relabeling(rows, perm):
    a = np.array([r[0] for r in rows])
    b = np.array([r[1] for r in rows])
    val = pair_precision(a, b)
    assert val == pytest.approx(brute_precision(a, b), abs=1e-12)
    assert pair_precision(np.array(perm)[a], b) == pytest.approx(val, abs=1e-12)
    assert 0.0 <= val <= 1.0


def test_conductance_examples():
    edges = EdgeList.from_pairs(4, [(0, 1), (0, 2), (0, 3), (1, 2)])
    assert conductance(range(4), edges) == 0.0
    assert conductance([3], edges) == 1.0
    with pytest.raises(MetricError):
        conductance([], edges)
    iso = EdgeList.from_pairs(3, [(0, 1)])
    with pytest.raises(MetricError):
        conductance([2], iso)


def test_conductance_of_planted_cluster():
    n, p, q = 1000, 0.5, 0.05
    expected = q * (n / 2) / (p * (n / 2 - 1) + q * (n / 2))
    assert expected == pytest.approx(0.0912, abs=5e-4)
    phis = []
    for s in range(20):
        edges, truth = generate(PlantedConfig(n, 2, p, q, graph_seed=100 + s))
        phis.append(conductance(truth.clusters()[0], edges))
    phis = np.array(phis)
    assert abs(phis.mean() - expected) <= 3 * phis.std(ddof=1) / math.sqrt(20) + 1e-4


@given(st.integers(2, 20), st.data())
def test_conductance_matches_brute_force_and_boundary_symmetry(n, data):
    pairs = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=1, max_size=60))
    pairs = [(u, v) for u, v in pairs if u != v]
    if not pairs:
        return
    edges = EdgeList.from_pairs(n, pairs)
    U = data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n))
    deg = edges.degrees()
    comp = sorted(set(range(n)) - U)
    vol_u = deg[list(U)].sum()
    vol_c = deg[comp].sum() if comp else 0
    if vol_u == 0:
        return
    phi = conductance(sorted(U), edges)
    assert phi == pytest.approx(brute_conductance(U, n, edges.pairs.tolist()), abs=1e-12)
    if vol_c:
        # both sides see the same boundary edges
        assert phi * vol_u == pytest.approx(conductance(comp, edges) * vol_c)


def test_evaluate_and_csv_row():
    edges = EdgeList.from_pairs(4, [(0, 1), (2, 3), (1, 2)])
    lam, rho, prec, sizes = evaluate(np.array([0, 0, 1, 1]), edges, [0, 0, 1, 1], 2)
    assert (lam, rho, prec, sizes) == (pytest.approx(1 / 3), 1.0, 1.0, [2, 2])
    assert cut_edges(np.array([0, 0, 1, 1]), edges) == 1
    row = MetricsReport("r1", 4, 2, 0.5, 0.1, 20, "egypt", 3, lam, rho, prec, 0.25).as_row()
    assert list(row) == ["run_id", "n", "k", "p", "q", "B", "algorithm", "seed",
                         "lambda", "rho", "precision", "wall_time_s"]
    assert row["lambda"] == repr(1 / 3)
    nan_row = MetricsReport("r", 4, 2, float("nan"), 0.1, 0, "hash", 0, 0.0, 1.0, 1.0, 0.0).as_row()
    assert nan_row["p"] == ""
