"""Planted partition graphs G(n, k, p, q) and their random-order streams."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import EdgeList, Stream, stream_from_edges


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PlantedConfig:
    n: int
    k: int
    p: float
    q: float
    graph_seed: int = 0
    order_seed: int = 0
    allow_equal: bool = False  # permits p == q (the G(n, p) degenerate case)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if self.k < 2:
            raise ConfigError(f"k must be at least 2, got {self.k}")
        if self.k > self.n:
            raise ConfigError(f"k={self.k} exceeds n={self.n}")
        for name, val in (("p", self.p), ("q", self.q)):
            if not 0.0 <= val <= 1.0:
                raise ConfigError(f"{name}={val} is not a probability")
        if self.q > self.p or (self.q == self.p and not self.allow_equal):
            raise ConfigError(f"need q < p, got p={self.p}, q={self.q}")


@dataclass(frozen=True)
class GroundTruth:
    """Hidden cluster of every vertex (``psi[v]`` in ``0..k-1``)."""

    psi: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return len(self.psi)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.psi, minlength=self.k)

    def clusters(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.psi == c) for c in range(self.k)]


def cluster_sizes(n: int, k: int) -> np.ndarray:
    """Balanced sizes; the first ``n % k`` clusters get the extra vertex."""
    sizes = np.full(k, n // k, dtype=np.int64)
    sizes[: n % k] += 1
    return sizes


def planted_truth(n: int, k: int) -> GroundTruth:
    """Contiguous blocks of ``cluster_sizes(n, k)`` vertices."""
    return GroundTruth(np.repeat(np.arange(k), cluster_sizes(n, k)), k)


def generate(config: PlantedConfig) -> tuple[EdgeList, GroundTruth]:
    """Sample G(n, k, p, q).

    Every one of the C(n, 2) pairs gets its own coin flip, so memory is
    O(n) per row and time is O(n^2); fine up to n of a few times 10^4.
    """
    config.validate()
    n, p, q = config.n, config.p, config.q
    truth = planted_truth(n, config.k)
    psi = truth.psi
    rng = np.random.default_rng(config.graph_seed)
    rows, cols = [], []
    for u in range(n - 1):
        others = np.arange(u + 1, n)
        prob = np.where(psi[others] == psi[u], p, q)
        hit = others[rng.random(n - u - 1) < prob]
        if hit.size:
            rows.append(np.full(hit.size, u, dtype=np.int64))
            cols.append(hit)
    if rows:
        pairs = np.column_stack([np.concatenate(rows), np.concatenate(cols)])
    else:
        pairs = np.empty((0, 2), dtype=np.int64)
    # already sorted and unique by construction
    return EdgeList(n, pairs), truth


def random_order(n: int, order_seed: int) -> np.ndarray:
    return np.random.default_rng(order_seed).permutation(n)


def stream(edges: EdgeList, order_seed: int) -> Stream:
    """Random-order incidence stream; the permutation is fixed by ``order_seed``."""
    return stream_from_edges(edges, random_order(edges.n, order_seed))


def prefix_cluster_counts(truth: GroundTruth, order: np.ndarray) -> np.ndarray:
    """``out[i, c]`` = vertices of cluster ``c`` among the first ``i + 1`` arrivals."""
    onehot = np.zeros((len(order), truth.k), dtype=np.int32)
    onehot[np.arange(len(order)), truth.psi[order]] = 1
    return np.cumsum(onehot, axis=0)
