"""Pure-numpy implementations of the hot kernels.

Drop-in twins of the compiled versions in ``_kernels.pyx``; the dispatching
package picks whichever is available. Kept vectorized so the fallback stays
usable for the full acceptance workload.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# Masks per vectorized batch. 2**16 keeps the (batch, edges) temporaries
# around ~10 MB for 24 edges.
_CHUNK = 1 << 16


def clique_pmf_by_enumeration(edge_probs) -> np.ndarray:
    """Distribution of (longest success run) over all 2^m edge outcomes.

    Returns an array ``out`` of length m+1 where ``out[r]`` is the total
    probability of masks whose longest consecutive run of successes is r.
    Entry r corresponds to a realized clique number of r+1.
    """
    q = np.ascontiguousarray(edge_probs, dtype=np.float64)
    if q.ndim != 1:
        raise ValueError("edge_probs must be one-dimensional")
    m = q.shape[0]
    out = np.zeros(m + 1, dtype=np.float64)
    if m == 0:
        out[0] = 1.0
        return out
    if m > 62:
        raise ValueError(f"cannot enumerate {m} edges")
    shifts = np.arange(m, dtype=np.uint64)
    total = 1 << m
    for start in range(0, total, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        bits = (ids[:, None] >> shifts[None, :]) & np.uint64(1)
        on = bits.astype(bool)
        prob = np.where(on, q, 1.0 - q).prod(axis=1)
        run = np.zeros(ids.shape[0], dtype=np.int64)
        best = np.zeros_like(run)
        for e in range(m):
            run = (run + 1) * bits[:, e].astype(np.int64)
            np.maximum(best, run, out=best)
        out += np.bincount(best, weights=prob, minlength=m + 1)
    return out


def coverage_chain_greedy(masks, block_starts, kappas, edge_bits):
    """Decentralized greedy over packed coverage bitsets.

    ``masks`` is a (num_elements, num_words) uint64 array, one packed
    point-coverage bitset per ground element, grouped by chain position.
    Rows ``block_starts[i]:block_starts[i+1]`` belong to position i and must
    be sorted by local id so that ties resolve to the earliest row.
    ``edge_bits[i]`` tells whether the hand-off from position i to i+1
    succeeded; on failure the receiver starts from an empty context.

    Returns ``(selected, value)``: the picked row indices in pick order and
    the number of points covered by their union.
    """
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    starts = np.ascontiguousarray(block_starts, dtype=np.int64)
    caps = np.ascontiguousarray(kappas, dtype=np.int64)
    bits = np.ascontiguousarray(edge_bits, dtype=np.uint8)
    n = caps.shape[0]
    if masks.ndim != 2:
        raise ValueError("masks must be two-dimensional")
    if starts.shape[0] != n + 1:
        raise ValueError(f"block_starts must have {n + 1} entries")
    if bits.shape[0] != n - 1:
        raise ValueError(f"edge_bits must have {n - 1} entries")
    words = masks.shape[1]
    carry = np.zeros(words, dtype=np.uint64)
    selected: list[int] = []
    for pos in range(n):
        if pos > 0 and not bits[pos - 1]:
            carry = np.zeros(words, dtype=np.uint64)
        lo, hi = int(starts[pos]), int(starts[pos + 1])
        block = masks[lo:hi]
        cap = int(caps[pos])
        if not 0 <= cap <= hi - lo:
            raise ValueError(f"capacity {cap} outside 0..{hi - lo} at position {pos}")
        acc = carry.copy()
        available = np.ones(hi - lo, dtype=bool)
        for _ in range(cap):
            gains = np.bitwise_count(block & ~acc).sum(axis=1, dtype=np.int64)
            gains[~available] = -1
            best = int(np.argmax(gains))
            available[best] = False
            acc |= block[best]
            selected.append(lo + best)
        carry = acc
    if selected:
        union = np.bitwise_or.reduce(masks[selected], axis=0)
        value = int(np.bitwise_count(union).sum())
    else:
        value = 0
    return np.asarray(selected, dtype=np.int64), value
