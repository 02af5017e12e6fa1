"""EGyPT: streaming partitioning by path-2 (common neighbour) classification.

The first ``B`` arrivals are held in a buffer and only provisionally placed.
Two random samples are drawn from the buffer: representatives ``S`` and a
reference set ``R``.  Every later vertex is scored against each
representative by the number of common neighbours inside ``R`` and joins
the machine of the winning representative.  Buffer vertices still
unclassified at the end of the stream are scored the same way.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import PartitionState
from .streams import Stream

log = logging.getLogger(__name__)

_CHUNK = 1024


class Mode(str, enum.Enum):
    THRESHOLD = "threshold"
    ARGMAX = "argmax"


class ParameterError(ValueError):
    pass


def default_s_size(n: int, k: int) -> int:
    return max(1, math.ceil(3 * k * math.log(max(n, 2))))


def default_r_size(n: int) -> int:
    return max(1, math.ceil(math.log(max(n, 2)) ** 6))


@dataclass
class EgyptParams:
    """Knobs of one EGyPT pass.

    ``s_size``/``r_size`` default to ``ceil(3 k ln n)`` and ``ceil(ln^6 n)``,
    clipped to ``B``.  ``p_hat``/``q_hat`` are only read in THRESHOLD mode;
    ``m_scale`` multiplies the expected count ``M`` (use ``1/k`` for the
    uniform-reference convention).  ``zero_rule`` decides vertices with no
    2-path to any representative: ``"smallest-id"`` applies the plain tie
    rule, ``"votes"`` follows 2-paths through R to already placed vertices.
    """

    B: int
    s_size: int | None = None
    r_size: int | None = None
    mode: Mode = Mode.ARGMAX
    p_hat: float | None = None
    q_hat: float | None = None
    m_scale: float = 1.0
    sample_seed: int = 0
    disjoint: bool = False
    estimate_pq: bool = False
    zero_rule: str = "votes"

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.zero_rule not in ("votes", "smallest-id"):
            raise ParameterError(f"unknown zero_rule {self.zero_rule!r}")
        if self.B < 1:
            raise ParameterError(f"buffer size must be positive, got {self.B}")
        for name in ("s_size", "r_size"):
            val = getattr(self, name)
            if val is not None and not 1 <= val <= self.B:
                raise ParameterError(f"{name}={val} must lie in [1, B={self.B}]")
        if self.mode is Mode.THRESHOLD and not self.estimate_pq:
            if self.p_hat is None or self.q_hat is None:
                raise ParameterError("threshold mode needs p_hat and q_hat (or estimate_pq)")
            if not self.p_hat > self.q_hat:
                raise ParameterError("threshold mode needs p_hat > q_hat")
        if self.disjoint and self.s_size and self.r_size and self.s_size + self.r_size > self.B:
            raise ParameterError("disjoint samples need s_size + r_size <= B")

    def sizes(self, n: int, k: int) -> tuple[int, int]:
        if self.B > n:
            raise ParameterError(f"buffer size {self.B} exceeds stream length {n}")
        s = self.s_size if self.s_size is not None else min(self.B, default_s_size(n, k))
        r = self.r_size if self.r_size is not None else min(self.B, default_r_size(n))
        if self.disjoint and s + r > self.B:
            r = self.B - s
            if r < 1:
                raise ParameterError("no room for a disjoint reference sample")
        return s, r


@dataclass
class Buffer:
    """The first ``B`` arrivals with their induced adjacency and samples.

    ``adj`` is indexed by arrival position; ``s_pos``/``r_pos`` are buffer
    positions of ``S``/``R``, with ``S`` sorted by vertex id so that an
    argmax over it breaks ties toward the smallest id.
    """

    vertices: np.ndarray
    adj: np.ndarray
    s_pos: np.ndarray
    r_pos: np.ndarray

    @property
    def S(self) -> np.ndarray:
        return self.vertices[self.s_pos]

    @property
    def R(self) -> np.ndarray:
        return self.vertices[self.r_pos]

    def adj_sr(self) -> np.ndarray:
        return np.ascontiguousarray(self.adj[np.ix_(self.s_pos, self.r_pos)])


def sample_buffer(B: int, s_size: int, r_size: int, seed, disjoint: bool = False):
    """Buffer positions of S and R, drawn without replacement.

    S and R are independent draws unless ``disjoint``.
    """
    if s_size > B or r_size > B:
        raise ParameterError(f"sample sizes ({s_size}, {r_size}) exceed buffer {B}")
    rng = np.random.default_rng(seed)
    s_pos = rng.choice(B, size=s_size, replace=False)
    if disjoint:
        rest = np.setdiff1d(np.arange(B), s_pos)
        r_pos = rng.choice(rest, size=r_size, replace=False)
    else:
        r_pos = rng.choice(B, size=r_size, replace=False)
    return s_pos, np.sort(r_pos)


def buffer_phase(stream: Stream, B: int, s_size: int, r_size: int, seed=0,
                 disjoint: bool = False) -> Buffer:
    """Consume the first ``B`` events and draw the representative/reference samples."""
    if B > len(stream):
        raise ParameterError(f"buffer size {B} exceeds stream length {len(stream)}")
    vertices = stream.order[:B].astype(np.int64)
    local = np.full(stream.n, -1, dtype=np.int64)
    local[vertices] = np.arange(B)
    adj = np.zeros((B, B), dtype=np.uint8)
    lo, hi = stream.indptr[0], stream.indptr[B]
    rows = np.repeat(np.arange(B), np.diff(stream.indptr[:B + 1]))
    cols = local[stream.indices[lo:hi]]
    adj[rows, cols] = 1
    adj[cols, rows] = 1
    s_pos, r_pos = sample_buffer(B, s_size, r_size, seed, disjoint)
    s_pos = s_pos[np.argsort(vertices[s_pos], kind="stable")]
    return Buffer(vertices, adj, s_pos, r_pos)


def common_neighbors_in_r(j_neighbors, x_neighbors, R) -> int:
    """Number of 2-paths j - u - x with the middle vertex u in ``R``."""
    return len(set(j_neighbors) & set(x_neighbors) & set(R))


def step4_threshold(p_hat: float, q_hat: float, k: int, r_size: int,
                    m_scale: float = 1.0) -> tuple[float, float]:
    """Expected same-cluster count M and the acceptance level M - M^(2/3)."""
    M = m_scale * (p_hat ** 2 + (k - 1) * q_hat ** 2) * r_size
    return M, M - M ** (2.0 / 3.0)


def classify(counts: np.ndarray, threshold: float | None = None) -> tuple[int, bool]:
    """Index of the chosen representative and whether the threshold rule failed.

    ``counts`` is ordered by representative id.  With a threshold the first
    (smallest-id) representative reaching it wins; otherwise, or when none
    reaches it, the maximum count wins with ties to the smallest id.
    """
    if threshold is not None:
        ok = np.flatnonzero(counts >= threshold)
        if ok.size:
            return int(ok[0]), False
        return int(np.argmax(counts)), True
    return int(np.argmax(counts)), False


def estimate_pq(buffer: Buffer) -> tuple[float, float]:
    """Rough plug-in (p_hat, q_hat) from buffer densities.  Experimental.

    q_hat is the overall buffer edge density; p_hat is the square root of the
    largest representative-pair co-neighbour density in R.
    """
    B = len(buffer.vertices)
    q_hat = float(buffer.adj.sum()) / max(1, B * (B - 1))
    sr = buffer.adj_sr().astype(np.int64)
    cc = sr @ sr.T
    np.fill_diagonal(cc, 0)
    p_hat = math.sqrt(cc.max() / len(buffer.r_pos)) if cc.size else q_hat
    return max(p_hat, q_hat + 1e-6), q_hat


def _average_linkage(sim: np.ndarray, k: int) -> np.ndarray:
    from scipy.cluster.hierarchy import fcluster, linkage
    from scipy.spatial.distance import squareform

    dist = sim.max() - sim
    np.fill_diagonal(dist, 0.0)
    Z = linkage(squareform(dist, checks=False), method="average")
    return fcluster(Z, t=k, criterion="maxclust").astype(np.int64) - 1


def group_representatives(rep_counts: np.ndarray, k: int) -> np.ndarray:
    """Split representatives into at most ``k`` groups by average linkage.

    Similarity is the number of shared reference neighbours.  Representatives
    sharing nothing with any other one, and those left alone in a singleton
    group while others remain, get ``-1``: they carry no grouping evidence and
    are resolved when first chosen.
    """
    n_s = len(rep_counts)
    sim = rep_counts.astype(np.float64)
    np.fill_diagonal(sim, 0.0)
    groups = np.full(n_s, -1, dtype=np.int64)
    active = np.flatnonzero(sim.sum(axis=1) > 0)
    while True:
        if len(active) <= k:
            groups[active] = np.arange(len(active))
            break
        labels = _average_linkage(sim[np.ix_(active, active)], k)
        sizes = np.bincount(labels)
        single = sizes[labels] == 1
        if not single.any() or len(active) <= 2 * k:
            groups[active] = labels
            break
        active = active[~single]
    # compact labels in order of first appearance (by representative id)
    _, first = np.unique(groups[groups >= 0], return_index=True)
    remap = {g: i for i, g in enumerate(groups[groups >= 0][np.sort(first)])}
    return np.array([remap.get(g, -1) for g in groups.tolist()], dtype=np.int64)


class RepresentativeBinder:
    """Maps representative groups to machines on first use.

    The first time any member of a group is chosen, the group claims the
    emptiest machine not owned by another group (lowest index on ties).
    An ungrouped representative adopts the group whose members the
    classified vertex shares the most reference neighbours with on average,
    or, failing that, the group owning the machine its 2-paths to placed
    vertices point at; with no signal at all it opens a new group while
    machines remain.
    """

    def __init__(self, k: int, groups: np.ndarray):
        self.k = k
        self.groups = np.array(groups, dtype=np.int64)
        self.group_machine: list[int] = [-1] * (int(self.groups.max(initial=-1)) + 1)

    @property
    def machine(self) -> np.ndarray:
        gm = np.array(self.group_machine + [-1], dtype=np.int64)
        return gm[self.groups]

    def _adopt(self, s: int, evidence, machine_votes) -> int:
        n_groups = len(self.group_machine)
        best, best_val = -1, 0.0
        if evidence is not None:
            ev = np.clip(np.asarray(evidence, dtype=np.float64), 0, None)
            for g in range(n_groups):
                members = np.flatnonzero(self.groups == g)
                members = members[members != s]
                if members.size:
                    val = ev[members].mean()
                    if val > best_val:
                        best, best_val = g, val
        if best < 0 and machine_votes is not None and np.max(machine_votes) > 0:
            m = int(np.argmax(machine_votes))
            if m in self.group_machine:
                best = self.group_machine.index(m)
        if best < 0:
            if n_groups < self.k or n_groups == 0:
                self.group_machine.append(-1)
                best = n_groups
            else:
                best = 0
        self.groups[s] = best
        return best

    def is_grouped(self, s: int) -> bool:
        return self.groups[s] >= 0

    def machine_for(self, s: int, sizes: np.ndarray, evidence=None, machine_votes=None) -> int:
        g = int(self.groups[s])
        if g < 0:
            g = self._adopt(s, evidence, machine_votes)
        if self.group_machine[g] < 0:
            owned = {m for m in self.group_machine if m >= 0}
            free = [m for m in range(self.k) if m not in owned]
            if free:
                self.group_machine[g] = min(free, key=lambda i: (sizes[i], i))
            else:
                # more groups than machines: share the emptiest machine
                self.group_machine[g] = int(np.argmin(sizes))
        return self.group_machine[g]


@dataclass
class EgyptResult:
    assignment: np.ndarray
    representative: np.ndarray  # chosen representative per vertex (labels)
    provisional: np.ndarray  # Step-1 machine for buffer vertices, -1 elsewhere
    S: np.ndarray
    R: np.ndarray
    rep_machine: dict = field(default_factory=dict)
    overflow_events: int = 0
    threshold_fallbacks: int = 0
    unsupported: int = 0  # vertices with no 2-path to any representative
    groups: np.ndarray | None = None
    threshold: float | None = None


class _Pass:
    """Mutable bookkeeping of one run: placement, overflow, tagging and the
    per-machine 2-path tallies used when a vertex has no evidence.

    ``votes[r, m]`` counts placed vertices on machine ``m`` adjacent to
    reference vertex ``r``.
    """

    def __init__(self, n, k, capacity, binder, rep_ids, n_ref):
        self.state = PartitionState(n, k, capacity)
        self.binder = binder
        self.rep_ids = rep_ids
        self.pending = np.zeros(n, dtype=bool)
        self.representative = np.full(n, -1, dtype=np.int64)
        self.votes = np.zeros((n_ref, k), dtype=np.int64)
        self.overflow = 0
        self.fallbacks = 0
        self.unsupported = 0

    def put(self, v: int, machine: int, refs) -> None:
        st = self.state
        if not st.has_room(machine):
            machine = st.least_loaded()
            self.overflow += 1
        st.place(v, machine)
        self.pending[v] = False
        self.votes[refs, machine] += 1

    def assign(self, v: int, s: int, flagged: bool, refs, counts, rep_refs) -> None:
        mv = None
        if not self.binder.is_grouped(s):
            mv = self.votes[refs].sum(axis=0) + self.votes[rep_refs(s)].sum(axis=0)
        machine = self.binder.machine_for(s, self.state.sizes, counts, mv)
        self.representative[v] = self.rep_ids[s]
        self.fallbacks += flagged
        self.put(v, machine, refs)
        x = int(self.rep_ids[s])
        if self.pending[x]:
            # x* loses its non-classified tag and settles on its machine
            self.representative[x] = x
            self.put(x, machine, rep_refs(s))

    def assign_unsupported(self, v: int, refs) -> None:
        """No 2-path to any representative: follow 2-paths to placed vertices."""
        self.unsupported += 1
        tally = self.votes[refs].sum(axis=0)
        has_room = self.state.sizes < self.state.capacity
        tally = np.where(has_room, tally, -1)
        if tally.max() > 0:
            machine = int(np.argmax(tally))
        else:
            machine = self.state.least_loaded()
        self.put(v, machine, refs)


def run(stream: Stream, k: int, params: EgyptParams, capacity: int | None = None) -> EgyptResult:
    """One pass of EGyPT over ``stream`` onto ``k`` machines."""
    n = len(stream)
    s_size, r_size = params.sizes(n, k)
    buf = buffer_phase(stream, params.B, s_size, r_size, params.sample_seed, params.disjoint)
    B = params.B

    provisional = np.full(stream.n, -1, dtype=np.int64)
    provisional[buf.vertices] = np.arange(B) % k

    adj_sr = buf.adj_sr()
    sr = adj_sr.astype(np.int64)
    rep_counts = sr @ sr.T
    groups = group_representatives(rep_counts, k)

    threshold = None
    if params.mode is Mode.THRESHOLD:
        p_hat, q_hat = (estimate_pq(buf) if params.estimate_pq
                        else (params.p_hat, params.q_hat))
        _, threshold = step4_threshold(p_hat, q_hat, k, r_size, params.m_scale)

    rep_ids = buf.S
    binder = RepresentativeBinder(k, groups)
    ps = _Pass(stream.n, k, capacity, binder, rep_ids, len(buf.r_pos))
    ps.pending[buf.vertices] = True
    use_votes = params.zero_rule == "votes"

    def rep_refs(s):
        return np.flatnonzero(adj_sr[s])

    r_index = np.full(stream.n, -1, dtype=np.int64)
    r_index[buf.R] = np.arange(len(buf.r_pos))
    order, indptr, indices = stream.order, stream.indptr, stream.indices
    for lo in range(B, n, _CHUNK):
        hi = min(n, lo + _CHUNK)
        counts = _kernels.stream_counts(indptr, indices, lo, hi, r_index, adj_sr)
        top = counts.max(axis=1) if counts.shape[1] else np.zeros(hi - lo)
        for i in range(hi - lo):
            refs = r_index[indices[indptr[lo + i]:indptr[lo + i + 1]]]
            refs = refs[refs >= 0]
            v = int(order[lo + i])
            if use_votes and top[i] <= 0:
                ps.assign_unsupported(v, refs)
                continue
            s, flagged = classify(counts[i], threshold)
            ps.assign(v, s, flagged, refs, counts[i], rep_refs)

    # Step 5: leftover buffer vertices, scored through their buffer adjacency
    s_slot = np.full(B, -1, dtype=np.int64)
    s_slot[buf.s_pos] = np.arange(len(buf.s_pos))
    for pos in range(B):
        v = int(buf.vertices[pos])
        if not ps.pending[v]:
            continue
        refs = np.flatnonzero(buf.adj[pos, buf.r_pos])
        counts = sr[:, refs].sum(axis=1)
        if s_slot[pos] >= 0 and len(counts) > 1:
            counts[s_slot[pos]] = -1
        if use_votes and counts.max() <= 0:
            ps.assign_unsupported(v, refs)
            continue
        s, flagged = classify(counts, threshold)
        ps.assign(v, s, flagged, refs, counts, rep_refs)

    if ps.overflow:
        log.debug("egypt: %d overflow placements", ps.overflow)
    rep_machine = {int(rep_ids[i]): int(m) for i, m in enumerate(binder.machine) if m >= 0}
    return EgyptResult(ps.state.assignment, ps.representative, provisional, buf.S, buf.R,
                       rep_machine, ps.overflow, ps.fallbacks, ps.unsupported, groups, threshold)
