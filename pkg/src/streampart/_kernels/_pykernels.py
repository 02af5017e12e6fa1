"""Numpy implementations of the streaming hot loops.

Signatures and results match the compiled versions in ``_ckernels.pyx``
exactly; ``tests/test_kernels.py`` checks this.
"""
import numpy as np

_CHUNK = 512


def stream_counts(indptr, indices, lo, hi, r_pos, adj_sr):
    """Common-neighbour counts of arrivals ``lo..hi-1`` with every representative.

    ``r_pos[v]`` is the column of ``v`` in ``adj_sr`` (-1 if ``v`` is not in
    the reference set) and ``adj_sr[s, r]`` is 1 when representative ``s``
    and reference vertex ``r`` are adjacent.  Row ``i - lo`` of the result
    is the number of 2-paths arrival ``i`` -> reference -> representative.
    """
    n_s, n_r = adj_sr.shape
    out = np.zeros((hi - lo, n_s), dtype=np.int32)
    # float32 matmul is exact while counts stay below 2**24
    sr_t = np.ascontiguousarray(adj_sr.T, dtype=np.float32)
    for c0 in range(lo, hi, _CHUNK):
        c1 = min(hi, c0 + _CHUNK)
        seg = indices[indptr[c0]:indptr[c1]]
        pos = r_pos[seg]
        row = np.repeat(np.arange(c1 - c0), np.diff(indptr[c0:c1 + 1]))
        keep = pos >= 0
        ind = np.zeros((c1 - c0, n_r), dtype=np.float32)
        ind[row[keep], pos[keep]] = 1.0
        out[c0 - lo:c1 - lo] = (ind @ sr_t).astype(np.int32)
    return out


def lwd_choose(counts, sizes, capacity) -> int:
    """Machine maximising ``counts * (1 - sizes / capacity)`` among those with
    room, lowest index on ties."""
    sizes = np.asarray(sizes)
    score = np.asarray(counts) * (1.0 - sizes / float(capacity))
    score = np.where(sizes >= capacity, -np.inf, score)
    best = int(np.argmax(score))
    if sizes[best] >= capacity:
        raise AssertionError("all machines are full")
    return best


def lwd_pass(order, indptr, indices, n, k, capacity):
    """Linear weighted greedy over a whole stream (see :func:`lwd_choose`)."""
    assign = np.full(n, -1, dtype=np.int64)
    sizes = np.zeros(k, dtype=np.int64)
    for i in range(len(order)):
        nb = indices[indptr[i]:indptr[i + 1]]
        counts = np.bincount(assign[nb], minlength=k) if nb.size else np.zeros(k, dtype=np.int64)
        best = lwd_choose(counts, sizes, capacity)
        assign[order[i]] = best
        sizes[best] += 1
    return assign
