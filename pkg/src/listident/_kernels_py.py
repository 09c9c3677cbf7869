"""Pure-Python kernels.

Reference implementations of the routines in ``_kernels.pyx``. Both modules
expose the same functions with the same semantics; ``listident.kernels``
picks one at import time.
"""
from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

INFINITE = -1  # k_max sentinel for the unbounded family


def _group_prefix(m, k_max):
    """Number of non-empty exclusion sets whose largest position is <= m."""
    if m <= 0:
        return 0
    if k_max == INFINITE:
        return (1 << m) - 1
    return sum(comb(m, s) for s in range(1, min(k_max, m) + 1))


def _lex_rank(combo, n):
    r = len(combo)
    rank = 0
    prev = 0
    for i, a in enumerate(combo, start=1):
        for v in range(prev + 1, a):
            rank += comb(n - v, r - i)
        prev = a
    return rank


def _lex_unrank(rank, n, r):
    out = []
    v = 1
    for i in range(1, r + 1):
        while True:
            c = comb(n - v, r - i)
            if rank < c:
                break
            rank -= c
            v += 1
        out.append(v)
        v += 1
    return out


def rank_exclusion(positions, k_max):
    """1-based collection index of the exclusion set with these spiral positions.

    ``positions`` must be strictly increasing. The empty set maps to 1.
    """
    positions = list(positions)
    if not positions:
        return 1
    s = len(positions)
    if k_max != INFINITE and s > k_max:
        raise ValueError(f"exclusion set of size {s} exceeds k_max={k_max}")
    m = positions[-1]
    a = s - 1
    within = sum(comb(m - 1, j) for j in range(a))
    within += _lex_rank(positions[:-1], m - 1)
    return 1 + _group_prefix(m - 1, k_max) + within + 1


def _find_group(r, k_max):
    if k_max == INFINITE:
        return r.bit_length()
    lo, hi = 1, 1
    while _group_prefix(hi, k_max) < r:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if _group_prefix(mid, k_max) >= r:
            hi = mid
        else:
            lo = mid + 1
    return lo


def unrank_exclusion(index, k_max):
    """Inverse of :func:`rank_exclusion`; returns sorted spiral positions."""
    if index < 1:
        raise IndexError("collection indices start at 1")
    if index == 1:
        return []
    r = index - 1
    m = _find_group(r, k_max)
    w = r - _group_prefix(m - 1, k_max) - 1
    a = 0
    while True:
        c = comb(m - 1, a)
        if w < c:
            break
        w -= c
        a += 1
    return _lex_unrank(w, m - 1, a) + [m]


def min_hitting_subset(members, need_masks, cap):
    """Smallest, then lexicographically least, subset of ``members`` hitting every mask.

    ``members`` are bit positions in increasing order; a candidate T hits a
    mask when ``T & mask != 0``. Returns a list of bit positions, or None when
    no subset of size <= cap works.
    """
    needs = [int(x) for x in need_masks]
    if any(x == 0 for x in needs):
        return None
    for size in range(0, min(cap, len(members)) + 1):
        for combo in combinations(members, size):
            t = 0
            for b in combo:
                t |= 1 << b
            if all(t & x for x in needs):
                return list(combo)
    return None


def extract_pair_bits(stream, n_bits):
    """Unbiased bits from an i.i.d. stream by the anchor-pair rule.

    Returns ``(bits, consumed, a, b)``; ``consumed`` is the 1-based stream
    position of the last element read (0 if no anchor pair exists).
    """
    xs = [int(v) for v in stream]
    bits = []
    if not xs:
        return bits, 0, None, None
    a = xs[0]
    j1 = None
    for t, v in enumerate(xs, start=1):
        if v != a:
            j1 = t
            break
    if j1 is None:
        return bits, len(xs), a, None
    b = xs[j1 - 1]
    consumed = j1
    # even-substream element e_i sits at 1-based stream position 2i
    i = j1 + 1
    while len(bits) < n_bits and 2 * (i + 1) <= len(xs):
        u, v = xs[2 * i - 1], xs[2 * (i + 1) - 1]
        consumed = 2 * (i + 1)
        if u == a and v == b:
            bits.append(1)
        elif u == b and v == a:
            bits.append(0)
        i += 2
    return bits, consumed, a, b


def run_counts(ident, d):
    """Per-node counts of level-d descendants reached through identifying nodes only.

    ``ident[n]`` flags node n (1-based heap numbering, slot 0 unused). The
    result ``cnt`` has length 2**d; ``cnt[n]`` is 0 whenever ``ident[n]`` is 0.
    """
    ident = np.asarray(ident, dtype=np.uint8)
    size = 1 << d
    cnt = np.zeros(size, dtype=np.int64)
    lo = 1 << (d - 1)
    cnt[lo:size] = ident[lo:size]
    for level in range(d - 1, 0, -1):
        lo, hi = 1 << (level - 1), 1 << level
        kids = cnt[2 * lo:2 * hi].reshape(-1, 2).sum(axis=1)
        cnt[lo:hi] = kids * ident[lo:hi]
    return cnt
