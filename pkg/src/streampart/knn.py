"""k'-nearest-neighbour incidence streams from labelled point sequences."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import MetricError, conductance
from .streams import EdgeList, Stream, StreamError, stream_from_edges


class Reference(str, enum.Enum):
    FIRST_B = "first-b"
    ALL_ARRIVED = "all"


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray  # (n, d) float
    labels: np.ndarray  # (n,) int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must be an (n, d) array with d >= 1")
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (pts.shape[0],):
            raise ValueError("one label per point required")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def load_points(path: str | Path) -> PointSet:
    """Read ``label,v1,...,vd`` rows; row order is stream order."""
    labels, rows = [], []
    width = None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) < 2:
                raise StreamError(f"{path}:{lineno}: need a label and at least one coordinate")
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise StreamError(f"{path}:{lineno}: expected {width} fields, got {len(rec)}")
            try:
                labels.append(int(rec[0]))
                rows.append([float(x) for x in rec[1:]])
            except ValueError as exc:
                raise StreamError(f"{path}:{lineno}: non-numeric field") from exc
    if not rows:
        raise StreamError(f"{path}: no points")
    return PointSet(np.array(rows), np.array(labels))


def write_points(path: str | Path, ps: PointSet) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for lab, row in zip(ps.labels.tolist(), ps.points.tolist()):
            w.writerow([lab, *map(repr, row)])


def gaussian_clusters(n: int, d: int, centers, sigma: float, seed=0) -> PointSet:
    """Isotropic Gaussian blobs, ``n`` split evenly over ``centers``, shuffled."""
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, d)
    c = len(centers)
    if c < 2:
        raise ValueError("need at least two centers")
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % c
    labels = labels[rng.permutation(n)]
    pts = centers[labels] + sigma * rng.standard_normal((n, d))
    return PointSet(pts, labels)


def separated_centers(c: int, d: int, distance: float) -> np.ndarray:
    """``c`` centres at pairwise distance ``distance``: scaled unit vectors."""
    if c > d:
        raise ValueError(f"cannot place {c} equidistant centres this way in {d} dimensions")
    centers = np.zeros((c, d))
    centers[np.arange(c), np.arange(c)] = distance / math.sqrt(2)
    return centers


def _nearest(points, queries, candidates, k_prime, exclude_self=False):
    """Indices (into ``candidates``) of the k' nearest, ties to smaller index."""
    cand = points[candidates]
    out = []
    for qi in queries:
        d2 = np.sum((cand - points[qi]) ** 2, axis=1)
        if exclude_self:
            d2 = np.where(candidates == qi, np.inf, d2)
        # lexsort: primary distance, secondary candidate index
        idx = np.lexsort((candidates, d2))
        kk = min(k_prime, len(candidates) - (1 if exclude_self else 0))
        out.append(candidates[idx[:kk]])
    return out


def knn_edges(ps: PointSet, k_prime: int, reference=Reference.FIRST_B, B: int | None = None) -> EdgeList:
    """Undirected, deduplicated k'-NN edge set under the chosen reference rule."""
    reference = Reference(reference)
    if k_prime < 1:
        raise ValueError("k_prime must be at least 1")
    n = ps.n
    pts = ps.points
    src, dst = [], []
    if reference is Reference.FIRST_B:
        if B is None:
            raise ValueError("FIRST_B needs B")
        if B > n:
            raise ValueError(f"B={B} exceeds n={n}")
        if B < k_prime:
            raise ValueError(f"B={B} is smaller than k'={k_prime}")
        ref = np.arange(B)
        for i, nb in zip(range(B), _nearest(pts, range(B), ref, k_prime, exclude_self=True)):
            src.extend([i] * len(nb))
            dst.extend(nb.tolist())
        for i, nb in zip(range(B, n), _nearest(pts, range(B, n), ref, k_prime)):
            src.extend([i] * len(nb))
            dst.extend(nb.tolist())
    else:
        for i in range(1, n):
            nb = _nearest(pts, [i], np.arange(i), k_prime)[0]
            src.extend([i] * len(nb))
            dst.extend(nb.tolist())
    pairs = np.column_stack([src, dst]) if src else np.empty((0, 2), dtype=np.int64)
    return EdgeList.from_pairs(n, pairs)


def knn_stream(ps: PointSet, k_prime: int, reference=Reference.FIRST_B,
               B: int | None = None) -> tuple[Stream, EdgeList]:
    """Stream the points in file order with their k'-NN back-edges."""
    edges = knn_edges(ps, k_prime, reference, B)
    return stream_from_edges(edges, np.arange(ps.n)), edges


def class_conductances(ps: PointSet, edges: EdgeList) -> dict[int, float]:
    """Conductance of every label class; NaN when the class has zero volume."""
    out = {}
    for c in np.unique(ps.labels).tolist():
        try:
            out[c] = conductance(np.flatnonzero(ps.labels == c), edges)
        except MetricError:
            out[c] = float("nan")
    return out
