"""Partition state for a single streaming pass and post-hoc quality metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .streams import EdgeList

UNASSIGNED = -1

CSV_FIELDS = ("run_id", "n", "k", "p", "q", "B", "algorithm", "seed",
              "lambda", "rho", "precision", "wall_time_s")


class PlacementError(RuntimeError):
    """A vertex was placed twice or onto an unknown machine."""


class CapacityError(PlacementError):
    """The target machine is full; the caller must pick another one."""


class MetricError(ValueError):
    pass


def default_capacity(n: int, k: int, nu: float = 1.0) -> int:
    # small epsilon guards against 1.0000000002 * n / k rounding up
    return max(1, math.ceil(nu * n / k - 1e-9))


class PartitionState:
    """k machines with a hard capacity; vertices are placed at most once.

    Membership lookups go through the dense ``assignment`` array, which is
    O(1) per query.
    """

    def __init__(self, n: int, k: int, capacity: int | None = None):
        self.n = n
        self.k = k
        self.capacity = default_capacity(n, k) if capacity is None else int(capacity)
        if self.capacity * k < n:
            raise PlacementError(f"capacity {self.capacity} x {k} machines cannot hold {n} vertices")
        self.assignment = np.full(n, UNASSIGNED, dtype=np.int64)
        self.sizes = np.zeros(k, dtype=np.int64)

    def has_room(self, machine: int) -> bool:
        return self.sizes[machine] < self.capacity

    def place(self, v: int, machine: int) -> None:
        if not 0 <= machine < self.k:
            raise PlacementError(f"unknown machine {machine}")
        if self.assignment[v] != UNASSIGNED:
            raise PlacementError(f"vertex {v} already on machine {self.assignment[v]}")
        if self.sizes[machine] >= self.capacity:
            raise CapacityError(f"machine {machine} is full ({self.capacity})")
        self.assignment[v] = machine
        self.sizes[machine] += 1

    def contains(self, machine: int, v: int) -> bool:
        return self.assignment[v] == machine

    def least_loaded(self) -> int:
        """Machine with the most spare room, lowest index on ties."""
        return int(np.argmin(self.sizes))

    @property
    def complete(self) -> bool:
        return bool(np.all(self.assignment != UNASSIGNED))


def _check_complete(assignment: np.ndarray) -> np.ndarray:
    a = np.asarray(assignment)
    if np.any(a < 0):
        raise MetricError("assignment has unassigned vertices")
    return a


def cut_edges(assignment, edges: EdgeList) -> int:
    a = _check_complete(assignment)
    return int(np.count_nonzero(a[edges.pairs[:, 0]] != a[edges.pairs[:, 1]]))


def fraction_cut(assignment, edges: EdgeList) -> float:
    """Fraction of edges whose endpoints sit on different machines."""
    if edges.m == 0:
        raise MetricError("fraction cut undefined on an empty edge set")
    return cut_edges(assignment, edges) / edges.m


def imbalance(sizes, n: int | None = None) -> float:
    """Normalised maximum load: max size over n/k.

    Accepts a :class:`PartitionState` or a sequence of per-machine sizes.
    """
    if isinstance(sizes, PartitionState):
        sizes, n = sizes.sizes, sizes.n
    sizes = np.asarray(list(sizes) if not isinstance(sizes, np.ndarray) else sizes)
    k = len(sizes)
    n = int(sizes.sum()) if n is None else n
    return float(sizes.max()) * k / n


def _pairs(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2


def contingency(assignment, labels) -> np.ndarray:
    a = _check_complete(assignment).astype(np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    rows, cols = a.max() + 1, labels.max() + 1
    return np.bincount(a * cols + labels, minlength=rows * cols).reshape(rows, cols)


def pair_precision(assignment, labels) -> float:
    """Fraction of the C(n, 2) vertex pairs whose same-machine relation
    matches their same-cluster relation.

    From the machine x cluster contingency table N: pairs together in both
    are sum C(N_ic, 2); pairs apart in both are C(n, 2) minus pairs together
    in either, i.e. C(n,2) - sum_i C(a_i, 2) - sum_c C(b_c, 2) + sum C(N_ic, 2).
    """
    labels = getattr(labels, "psi", labels)
    n = len(labels)
    if n < 2:
        raise MetricError("pair precision needs at least two vertices")
    N = contingency(assignment, labels)
    both = _pairs(N).sum()
    total = n * (n - 1) / 2
    apart = total - _pairs(N.sum(axis=1)).sum() - _pairs(N.sum(axis=0)).sum() + both
    return float((both + apart) / total)


def conductance(U, edges: EdgeList) -> float:
    """Boundary edges of ``U`` divided by the degree volume of ``U``."""
    mask = np.zeros(edges.n, dtype=bool)
    mask[np.asarray(list(U) if not isinstance(U, np.ndarray) else U, dtype=np.int64).reshape(-1)] = True
    if not mask.any():
        raise MetricError("conductance of an empty set")
    inu = mask[edges.pairs]
    vol = int(inu.sum())
    if vol == 0:
        raise MetricError("conductance undefined: set has zero volume")
    boundary = int(np.count_nonzero(inu[:, 0] != inu[:, 1]))
    return boundary / vol


@dataclass
class MetricsReport:
    run_id: str
    n: int
    k: int
    p: float
    q: float
    B: int
    algorithm: str
    seed: int
    lam: float
    rho: float
    precision: float
    wall_time_s: float
    sizes: list[int] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {
            "run_id": self.run_id, "n": self.n, "k": self.k, "p": _fmt(self.p), "q": _fmt(self.q),
            "B": self.B, "algorithm": self.algorithm, "seed": self.seed,
            "lambda": _fmt(self.lam), "rho": _fmt(self.rho), "precision": _fmt(self.precision),
            "wall_time_s": f"{self.wall_time_s:.6f}",
        }


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def evaluate(assignment, edges: EdgeList, labels, k: int) -> tuple[float, float, float, list[int]]:
    """(lambda, rho, precision, sizes) of a complete assignment."""
    a = _check_complete(assignment)
    sizes = np.bincount(a, minlength=k)
    lam = fraction_cut(a, edges) if edges.m else float("nan")
    return lam, imbalance(sizes, len(a)), pair_precision(a, labels), sizes.tolist()
