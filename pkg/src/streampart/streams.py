"""Edge lists, incidence events and vertex streams.

A stream is held in CSR form: ``order[i]`` is the i-th arriving vertex and
``indices[indptr[i]:indptr[i + 1]]`` are its neighbours among the vertices
that arrived before it, in ascending id order.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np


class StreamError(ValueError):
    """Malformed edge list, stream or stream file."""


@dataclass(frozen=True)
class EdgeList:
    """Undirected simple graph on vertices ``0..n-1``.

    ``pairs`` is an ``(m, 2)`` int array with ``pairs[:, 0] < pairs[:, 1]``,
    lexicographically sorted, without duplicates.
    """

    n: int
    pairs: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Sequence[int]]) -> "EdgeList":
        """Canonicalise arbitrary pairs: orient, sort, dedupe, reject loops."""
        arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise StreamError(f"edge endpoint outside [0, {n})")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise StreamError("self-loops are not allowed")
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0) if len(arr) else arr
        return cls(n, arr)

    @property
    def m(self) -> int:
        return len(self.pairs)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.pairs.ravel(), minlength=self.n)

    def validate(self) -> None:
        p = self.pairs
        if len(p) == 0:
            return
        if p.min() < 0 or p.max() >= self.n:
            raise StreamError(f"edge endpoint outside [0, {self.n})")
        if np.any(p[:, 0] >= p[:, 1]):
            raise StreamError("pairs must satisfy u < v")
        keys = p[:, 0] * self.n + p[:, 1]
        if np.any(np.diff(keys) <= 0):
            raise StreamError("pairs must be sorted and unique")

    def as_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.pairs}


@dataclass(frozen=True)
class IncidenceEvent:
    """One arriving vertex and its edges to previously arrived vertices."""

    vertex: int
    back_neighbors: tuple[int, ...]


@dataclass(frozen=True)
class Stream:
    """A vertex-arrival stream in CSR form (see module docstring)."""

    n: int
    order: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "order", np.ascontiguousarray(self.order, dtype=np.int32))
        object.__setattr__(self, "indptr", np.ascontiguousarray(self.indptr, dtype=np.int64))
        object.__setattr__(self, "indices", np.ascontiguousarray(self.indices, dtype=np.int32))

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[IncidenceEvent]:
        for i in range(len(self.order)):
            yield self.event(i)

    def event(self, i: int) -> IncidenceEvent:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return IncidenceEvent(int(self.order[i]), tuple(int(x) for x in self.indices[lo:hi]))

    def back_degrees(self) -> np.ndarray:
        """Number of back-neighbours per arrival position."""
        return np.diff(self.indptr)

    def positions(self) -> np.ndarray:
        """Inverse of ``order``: arrival position of every vertex."""
        pos = np.empty(self.n, dtype=np.int64)
        pos[self.order] = np.arange(len(self.order))
        return pos

    def to_edges(self) -> EdgeList:
        later = np.repeat(self.order.astype(np.int64), np.diff(self.indptr))
        return EdgeList.from_pairs(self.n, np.column_stack([later, self.indices]))

    @classmethod
    def from_events(cls, n: int, events: Iterable[IncidenceEvent]) -> "Stream":
        """Build a stream from events, checking every back-neighbour arrived earlier."""
        seen = np.zeros(n, dtype=bool)
        order, indptr, indices = [], [0], []
        for ev in events:
            v = ev.vertex
            if not 0 <= v < n or seen[v]:
                raise StreamError(f"vertex {v} out of range or repeated")
            nb = sorted(ev.back_neighbors)
            if nb and not seen[nb].all():
                raise StreamError(f"vertex {v} lists a neighbour that has not arrived")
            if len(set(nb)) != len(nb):
                raise StreamError(f"vertex {v} lists a duplicate neighbour")
            seen[v] = True
            order.append(v)
            indices.extend(nb)
            indptr.append(len(indices))
        return cls(n, np.array(order, dtype=np.int32), np.array(indptr), np.array(indices, dtype=np.int32))


def stream_from_edges(edges: EdgeList, order: np.ndarray) -> Stream:
    """Emit ``edges`` as incidence events in the given vertex arrival order.

    Each edge is delivered once, with the endpoint that arrives later.
    """
    order = np.asarray(order, dtype=np.int64)
    n = edges.n
    if len(order) != n or not np.array_equal(np.sort(order), np.arange(n)):
        raise StreamError("order must be a permutation of 0..n-1")
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    u, v = edges.pairs[:, 0], edges.pairs[:, 1]
    u_later = pos[u] > pos[v]
    later = np.where(u_later, u, v)
    earlier = np.where(u_later, v, u)
    key = pos[later] * n + earlier
    idx = np.argsort(key, kind="stable")
    counts = np.bincount(pos[later], minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return Stream(n, order, indptr, earlier[idx])


def write_stream(path: str | Path, stream: Stream, k: int) -> None:
    """Text format: header ``n k`` then ``vertex: id1 id2 ...`` per event."""
    with open(path, "w") as fh:
        fh.write(f"{stream.n} {k}\n")
        for i in range(len(stream)):
            lo, hi = stream.indptr[i], stream.indptr[i + 1]
            ids = " ".join(map(str, stream.indices[lo:hi].tolist()))
            fh.write(f"{stream.order[i]}: {ids}\n" if ids else f"{stream.order[i]}:\n")


def read_stream(path: str | Path) -> tuple[Stream, int]:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise StreamError(f"{path}:1: expected header 'n k'")
        try:
            n, k = int(header[0]), int(header[1])
        except ValueError as exc:
            raise StreamError(f"{path}:1: non-integer header") from exc
        events = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            head, sep, tail = line.partition(":")
            if not sep:
                raise StreamError(f"{path}:{lineno}: missing ':'")
            try:
                events.append(IncidenceEvent(int(head), tuple(int(x) for x in tail.split())))
            except ValueError as exc:
                raise StreamError(f"{path}:{lineno}: non-integer id") from exc
    try:
        return Stream.from_events(n, events), k
    except StreamError as exc:
        raise StreamError(f"{path}: {exc}") from exc


def write_labels(path: str | Path, labels: np.ndarray) -> None:
    """One line per vertex: ``vertex_id cluster_id``."""
    with open(path, "w") as fh:
        for v, c in enumerate(np.asarray(labels).tolist()):
            fh.write(f"{v} {c}\n")


def read_labels(path: str | Path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise StreamError(f"{path}:{lineno}: expected 'vertex_id cluster_id'")
            rows.append((int(parts[0]), int(parts[1])))
    if not rows:
        raise StreamError(f"{path}: empty label file")
    rows.sort()
    ids = [r[0] for r in rows]
    if ids != list(range(len(ids))):
        raise StreamError(f"{path}: vertex ids must cover 0..n-1 exactly once")
    return np.array([r[1] for r in rows], dtype=np.int64)
