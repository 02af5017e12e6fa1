# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the streaming hot loops (see ``_pykernels``)."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def stream_counts(const cnp.int64_t[::1] indptr, const cnp.int32_t[::1] indices,
                  Py_ssize_t lo, Py_ssize_t hi, const cnp.int64_t[::1] r_pos,
                  adj_sr):
    cdef const cnp.uint8_t[:, ::1] sr_t = np.ascontiguousarray(adj_sr.T, dtype=np.uint8)
    cdef Py_ssize_t n_s = sr_t.shape[1]
    out_arr = np.zeros((hi - lo, n_s), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, e, s
    cdef cnp.int64_t r
    with nogil:
        for i in range(lo, hi):
            for e in range(indptr[i], indptr[i + 1]):
                r = r_pos[indices[e]]
                if r < 0:
                    continue
                for s in range(n_s):
                    out[i - lo, s] += sr_t[r, s]
    return out_arr


def lwd_pass(const cnp.int32_t[::1] order, const cnp.int64_t[::1] indptr,
             const cnp.int32_t[::1] indices, Py_ssize_t n, Py_ssize_t k,
             cnp.int64_t capacity):
    assign_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] assign = assign_arr
    cdef cnp.int64_t[::1] sizes = np.zeros(k, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = np.zeros(k, dtype=np.int64)
    cdef Py_ssize_t i, e, m, best
    cdef cnp.int64_t a
    cdef double score, best_score, cap = <double>capacity
    with nogil:
        for i in range(order.shape[0]):
            for m in range(k):
                counts[m] = 0
            for e in range(indptr[i], indptr[i + 1]):
                a = assign[indices[e]]
                if a >= 0:
                    counts[a] += 1
            best = -1
            best_score = 0.0
            for m in range(k):
                if sizes[m] >= capacity:
                    continue
                score = counts[m] * (1.0 - sizes[m] / cap)
                if best < 0 or score > best_score:
                    best = m
                    best_score = score
            if best < 0:
                with gil:
                    raise AssertionError("all machines are full")
            assign[order[i]] = best
            sizes[best] += 1
    return assign_arr
