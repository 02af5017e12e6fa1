import itertools

import numpy as np
import pytest

from conftest import brute_conductance
from streampart.knn import (PointSet, Reference, class_conductances, gaussian_clusters, knn_edges,
                            knn_stream, load_points, separated_centers, write_points)
from streampart.streams import EdgeList, IncidenceEvent, StreamError


def test_load_points(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("0,1.0,2.0\n1,3.0,4.0\n0,5,6\n")
    ps = load_points(f)
    assert (ps.n, ps.d) == (3, 2)
    assert ps.labels.tolist() == [0, 1, 0]


@pytest.mark.parametrize("text,where", [("", "no points"), ("0,1,2\n1,3\n", ":2:"),
                                        ("0,1,2\n1,x,3\n", ":2:"), ("0\n", ":1:")])
def test_load_points_errors(tmp_path, text, where):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(StreamError, match=where):
        load_points(f)


def test_round_trip(tmp_path):
    ps = gaussian_clusters(60, 3, separated_centers(2, 3, 10.0), 1.0, seed=4)
    write_points(tmp_path / "g.csv", ps)
    back = load_points(tmp_path / "g.csv")
    assert np.array_equal(back.points, ps.points)
    assert np.array_equal(back.labels, ps.labels)


def test_gaussian_generator():
    centers = separated_centers(3, 4, 7.0)
    d = np.linalg.norm(centers[:, None] - centers[None], axis=-1)
    assert np.allclose(d[~np.eye(3, dtype=bool)], 7.0)
    ps = gaussian_clusters(100, 4, centers, 0.0, seed=1)
    assert np.array_equal(ps.points, centers[ps.labels])
    counts = np.bincount(ps.labels)
    assert counts.max() - counts.min() <= 1
    with pytest.raises(ValueError):
        gaussian_clusters(10, 2, [[0, 0]], 1.0)


def test_nearest_neighbours_share_labels():
    ps = gaussian_clusters(500, 2, separated_centers(2, 2, 10.0), 0.5, seed=2)
    d2 = ((ps.points[:, None] - ps.points[None]) ** 2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    nn = np.argsort(d2, axis=1)[:, :5]
    assert np.all(ps.labels[nn] == ps.labels[:, None])


def test_collinear_all_arrived():
    ps = PointSet(np.array([[0.0], [1.0], [3.0]]), np.array([0, 0, 1]))
    s, _ = knn_stream(ps, 1, Reference.ALL_ARRIVED)
    assert list(s) == [IncidenceEvent(0, ()), IncidenceEvent(1, (0,)), IncidenceEvent(2, (1,))]


def test_distance_ties_prefer_smaller_index():
    ps = PointSet(np.array([[0.0], [2.0], [1.0]]), np.zeros(3, int))
    assert knn_edges(ps, 1, "all").as_set() == {(0, 1), (0, 2)}


def brute_knn(points, k_prime):
    n = len(points)
    pairs = set()
    for i in range(n):
        d = [(float(np.sum((points[i] - points[j]) ** 2)), j) for j in range(n) if j != i]
        for _, j in sorted(d)[:k_prime]:
            pairs.add((min(i, j), max(i, j)))
    return pairs


def test_first_b_with_full_reference_is_symmetric_knn():
    ps = gaussian_clusters(40, 3, separated_centers(2, 3, 4.0), 1.0, seed=5)
    s, edges = knn_stream(ps, 3, Reference.FIRST_B, B=40)
    assert edges.as_set() == brute_knn(ps.points, 3)
    assert s.order.tolist() == list(range(40))


def test_later_points_link_only_to_reference():
    ps = gaussian_clusters(80, 2, separated_centers(2, 2, 5.0), 1.0, seed=6)
    edges = knn_edges(ps, 4, "first-b", B=20)
    deg = edges.degrees()
    assert np.all(deg[20:] == 4)
    assert np.all(edges.pairs[:, 0] < 20)


def test_knn_errors():
    ps = gaussian_clusters(10, 2, separated_centers(2, 2, 5.0), 1.0)
    with pytest.raises(ValueError):
        knn_edges(ps, 2, "first-b", B=11)
    with pytest.raises(ValueError):
        knn_edges(ps, 5, "first-b", B=3)
    with pytest.raises(ValueError):
        knn_edges(ps, 0, "all")


def test_knn_is_deterministic():
    ps = gaussian_clusters(200, 4, separated_centers(2, 4, 6.0), 1.0, seed=9)
    a, b = knn_edges(ps, 5, "first-b", B=50), knn_edges(ps, 5, "first-b", B=50)
    assert np.array_equal(a.pairs, b.pairs)


def test_gaussian_class_conductance_is_low():
    ps = gaussian_clusters(1000, 16, separated_centers(2, 16, 10.0), 1.0, seed=3)
    _, edges = knn_stream(ps, 5, "first-b", B=100)
    phis = class_conductances(ps, edges)
    assert set(phis) == {0, 1}
    assert all(phi < 0.1 for phi in phis.values())


def test_conductance_edge_cases():
    ps = PointSet(np.array([[0.0], [0.1], [10.0], [10.1]]), np.array([0, 0, 1, 1]))
    edges = knn_edges(ps, 1, "first-b", B=4)
    assert class_conductances(ps, edges) == {0: 0.0, 1: 0.0}
    one = PointSet(ps.points, np.zeros(4, int))
    assert class_conductances(one, edges) == {0: 0.0}
    lonely = PointSet(np.zeros((3, 1)), np.array([0, 0, 1]))
    phis = class_conductances(lonely, EdgeList.from_pairs(3, [(0, 1)]))
    assert phis[0] == 0.0 and np.isnan(phis[1])


def test_conductance_brute_force():
    ps = gaussian_clusters(24, 3, separated_centers(3, 3, 2.0), 1.0, seed=11)
    edges = knn_edges(ps, 2, "all")
    for c, phi in class_conductances(ps, edges).items():
        U = np.flatnonzero(ps.labels == c)
        assert phi == pytest.approx(brute_conductance(U, 24, edges.pairs.tolist()))
