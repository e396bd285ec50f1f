# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: outcome enumeration and packed-bitset chain greedy.

Mirrors ``pykernels`` exactly, including tie-breaking and summation order
grouping; see that module for the documented contracts.
"""

import numpy as np

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    static inline int chaingreedy_popcnt64(unsigned long long x)
    { return __builtin_popcountll(x); }
    #else
    static inline int chaingreedy_popcnt64(unsigned long long x)
    { int c = 0; while (x) { x &= x - 1; ++c; } return c; }
    #endif
    """
    int chaingreedy_popcnt64(unsigned long long x) nogil


def clique_pmf_by_enumeration(edge_probs):
    q = np.ascontiguousarray(edge_probs, dtype=np.float64)
    if q.ndim != 1:
        raise ValueError("edge_probs must be one-dimensional")
    cdef double[::1] qv = q
    cdef Py_ssize_t m = qv.shape[0]
    out = np.zeros(m + 1, dtype=np.float64)
    cdef double[::1] ov = out
    if m == 0:
        ov[0] = 1.0
        return out
    if m > 62:
        raise ValueError(f"cannot enumerate {m} edges")
    cdef unsigned long long total = (<unsigned long long>1) << m
    cdef unsigned long long mask
    cdef Py_ssize_t e
    cdef int run, best
    cdef double prob
    with nogil:
        for mask in range(total):
            prob = 1.0
            run = 0
            best = 0
            for e in range(m):
                if (mask >> e) & 1:
                    prob *= qv[e]
                    run += 1
                    if run > best:
                        best = run
                else:
                    prob *= 1.0 - qv[e]
                    run = 0
            ov[best] += prob
    return out


def coverage_chain_greedy(masks, block_starts, kappas, edge_bits):
    masks_arr = np.ascontiguousarray(masks, dtype=np.uint64)
    starts_arr = np.ascontiguousarray(block_starts, dtype=np.int64)
    caps_arr = np.ascontiguousarray(kappas, dtype=np.int64)
    bits_arr = np.ascontiguousarray(edge_bits, dtype=np.uint8)
    if masks_arr.ndim != 2:
        raise ValueError("masks must be two-dimensional")
    cdef const unsigned long long[:, ::1] mv = masks_arr
    cdef const long long[::1] starts = starts_arr
    cdef const long long[::1] caps = caps_arr
    cdef const unsigned char[::1] bits = bits_arr
    cdef Py_ssize_t n = caps.shape[0]
    if starts.shape[0] != n + 1:
        raise ValueError(f"block_starts must have {n + 1} entries")
    if bits.shape[0] != n - 1:
        raise ValueError(f"edge_bits must have {n - 1} entries")
    cdef Py_ssize_t words = mv.shape[1]

    cdef Py_ssize_t total_caps = 0
    cdef Py_ssize_t pos
    for pos in range(n):
        if caps[pos] < 0 or caps[pos] > starts[pos + 1] - starts[pos]:
            raise ValueError(
                f"capacity {caps[pos]} outside 0..{starts[pos + 1] - starts[pos]}"
                f" at position {pos}"
            )
        total_caps += caps[pos]

    carry_arr = np.zeros(words, dtype=np.uint64)
    acc_arr = np.zeros(words, dtype=np.uint64)
    selected_arr = np.empty(total_caps, dtype=np.int64)
    cdef unsigned long long[::1] carry = carry_arr
    cdef unsigned long long[::1] acc = acc_arr
    cdef long long[::1] selected = selected_arr
    used_arr = np.zeros(mv.shape[0], dtype=np.uint8)
    cdef unsigned char[::1] used = used_arr

    cdef Py_ssize_t lo, hi, e, w, best_row, out_idx = 0
    cdef long long cap, round_idx
    cdef long long gain, best_gain
    cdef unsigned long long merged
    cdef int value = 0

    with nogil:
        for pos in range(n):
            if pos > 0 and bits[pos - 1] == 0:
                for w in range(words):
                    carry[w] = 0
            lo = starts[pos]
            hi = starts[pos + 1]
            cap = caps[pos]
            for w in range(words):
                acc[w] = carry[w]
            for round_idx in range(cap):
                best_row = -1
                best_gain = -1
                for e in range(lo, hi):
                    if used[e]:
                        continue
                    gain = 0
                    for w in range(words):
                        gain += chaingreedy_popcnt64(mv[e, w] & ~acc[w])
                    if gain > best_gain:
                        best_gain = gain
                        best_row = e
                used[best_row] = 1
                for w in range(words):
                    acc[w] |= mv[best_row, w]
                selected[out_idx] = best_row
                out_idx += 1
            for w in range(words):
                carry[w] = acc[w]
        for w in range(words):
            merged = 0
            for e in range(mv.shape[0]):
                if used[e]:
                    merged |= mv[e, w]
            value += chaingreedy_popcnt64(merged)
    return selected_arr, value
