import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import brute_precision
from streampart._kernels._pykernels import lwd_choose
from streampart.baselines import LwdParams, hash_run, lwd_run
from streampart.core import fraction_cut, imbalance, pair_precision
from streampart.egypt import EgyptParams, run
from streampart.ppm import PlantedConfig, generate, stream
from streampart.streams import EdgeList, IncidenceEvent, Stream, stream_from_edges


def test_first_vertex_goes_to_machine_zero():
    s = Stream.from_events(3, [IncidenceEvent(2, ()), IncidenceEvent(0, ()), IncidenceEvent(1, ())])
    a = lwd_run(s, 3)
    assert a[2] == 0


def test_follows_neighbours_when_sizes_tie():
    assert lwd_choose([0, 2], [3, 3], 10) == 1
    assert lwd_choose([0, 0, 0], [0, 0, 0], 4) == 0
    # neighbours on a full machine do not count
    assert lwd_choose([5, 1], [4, 1], 4) == 1
    events = [IncidenceEvent(0, ()), IncidenceEvent(1, ()), IncidenceEvent(2, ()),
              IncidenceEvent(3, (2,)), IncidenceEvent(4, (2, 3)), IncidenceEvent(5, ())]
    assert lwd_run(Stream.from_events(6, events), 2, LwdParams(capacity=3)).tolist() == [0, 0, 0, 1, 1, 1]


def test_capacity_is_checked():
    s = stream_from_edges(EdgeList.from_pairs(4, []), np.arange(4))
    with pytest.raises(ValueError):
        lwd_run(s, 2, LwdParams(capacity=1))
    with pytest.raises(ValueError):
        lwd_run(s, 2, LwdParams(weight="exp"))


@given(st.integers(2, 60), st.integers(2, 6), st.floats(0.0, 1.0), st.integers(0, 1000))
def test_lwd_respects_capacity(n, k, density, seed):
    if k > n:
        return
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < density]
    s = stream_from_edges(EdgeList.from_pairs(n, pairs), rng.permutation(n))
    a = lwd_run(s, k)
    sizes = np.bincount(a, minlength=k)
    assert sizes.sum() == n
    assert sizes.max() <= -(-n // k)
    assert imbalance(sizes, n) <= 1 + k / n


def test_lwd_machine_relabeling_on_symmetric_input():
    # no edges at all: every tie goes to the lowest open index, filling machines in turn
    s = stream_from_edges(EdgeList.from_pairs(6, []), np.arange(6))
    assert lwd_run(s, 3).tolist() == [0, 0, 1, 1, 2, 2]


def test_egypt_beats_lwd_at_large_gap():
    e, l = [], []
    for seed in range(5):
        edges, truth = generate(PlantedConfig(2000, 2, 0.95, 0.05, graph_seed=seed))
        s = stream(edges, seed + 50)
        e.append(pair_precision(run(s, 2, EgyptParams(B=500, sample_seed=seed)).assignment, truth.psi))
        l.append(pair_precision(lwd_run(s, 2), truth.psi))
    assert np.mean(e) > np.mean(l)


def test_hash_alternates():
    s = stream_from_edges(EdgeList.from_pairs(8, []), np.arange(8)[::-1])
    assert hash_run(s, 2).tolist() == [0, 1, 0, 1, 0, 1, 0, 1]


def test_hash_cut_fraction():
    edges, truth = generate(PlantedConfig(2000, 2, 0.3, 0.05, graph_seed=1))
    lam = fraction_cut(hash_run(stream(edges, 2), 2), edges)
    assert abs(lam - 0.5) <= 0.05


def test_hash_precision_brute_force():
    edges, truth = generate(PlantedConfig(100, 2, 0.5, 0.1, graph_seed=3))
    a = hash_run(stream(edges, 3), 2)
    assert pair_precision(a, truth.psi) == pytest.approx(brute_precision(a, truth.psi), abs=1e-12)
