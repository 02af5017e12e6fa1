import itertools
import os

import numpy as np
import pytest
from hypothesis import settings

from streampart.streams import EdgeList

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


def brute_precision(assignment, labels):
    n = len(labels)
    good = sum((assignment[u] == assignment[v]) == (labels[u] == labels[v])
               for u, v in itertools.combinations(range(n), 2))
    return good / (n * (n - 1) / 2)


def brute_conductance(U, n, pairs):
    U = set(int(u) for u in U)
    boundary = sum((u in U) != (v in U) for u, v in pairs)
    vol = sum((u in U) + (v in U) for u, v in pairs)
    return boundary / vol


def brute_common(adj, j, x, R):
    return sum(1 for u in R if adj[j][u] and adj[x][u])


def random_edges(rng, n, density):
    pairs = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < density]
    return EdgeList.from_pairs(n, pairs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
