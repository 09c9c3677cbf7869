# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same API as ``_kernels_py``.

Index arithmetic runs in 64-bit integers and raises OverflowError when a
value would not fit; the dispatcher then falls back to the Python version,
which uses arbitrary precision.
"""
import numpy as np
cimport numpy as cnp
from libc.limits cimport LLONG_MAX

cnp.import_array()

INFINITE = -1


cdef long long _binom(long long n, long long r) except -2:
    cdef long long c = 1
    cdef long long i
    if r < 0 or r > n:
        return 0
    if r > n - r:
        r = n - r
    for i in range(r):
        if c > LLONG_MAX // (n - i):
            raise OverflowError("binomial exceeds 64 bits")
        c = c * (n - i) // (i + 1)
    return c


cdef long long _group_prefix(long long m, long long k_max) except -2:
    cdef long long total = 0
    cdef long long s, top, c
    if m <= 0:
        return 0
    if k_max == INFINITE:
        if m >= 62:
            raise OverflowError("group prefix exceeds 64 bits")
        return (1LL << m) - 1
    top = k_max if k_max < m else m
    for s in range(1, top + 1):
        c = _binom(m, s)
        if total > LLONG_MAX - c:
            raise OverflowError("group prefix exceeds 64 bits")
        total += c
    return total


def rank_exclusion(positions, long long k_max):
    cdef list pos = list(positions)
    cdef long long s = len(pos)
    cdef long long m, a, j, i, v, prev, r, within, base
    if s == 0:
        return 1
    if k_max != INFINITE and s > k_max:
        raise ValueError(f"exclusion set of size {s} exceeds k_max={k_max}")
    m = pos[s - 1]
    a = s - 1
    within = 0
    for j in range(a):
        within += _binom(m - 1, j)
    prev = 0
    r = a
    for i in range(a):
        for v in range(prev + 1, <long long>pos[i]):
            within += _binom(m - 1 - v, r - i - 1)
        prev = pos[i]
    base = _group_prefix(m - 1, k_max)
    if base > LLONG_MAX - within - 2:
        raise OverflowError("index exceeds 64 bits")
    return 1 + base + within + 1


cdef long long _find_group(long long r, long long k_max) except -2:
    cdef long long lo = 1, hi = 1, mid
    if k_max == INFINITE:
        mid = 0
        while r > 0:
            r >>= 1
            mid += 1
        return mid
    while _group_prefix(hi, k_max) < r:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if _group_prefix(mid, k_max) >= r:
            hi = mid
        else:
            lo = mid + 1
    return lo


def unrank_exclusion(index, long long k_max):
    cdef long long idx = index
    cdef long long r, m, w, a, c, n, v, i
    cdef list out = []
    if idx < 1:
        raise IndexError("collection indices start at 1")
    if idx == 1:
        return out
    r = idx - 1
    m = _find_group(r, k_max)
    w = r - _group_prefix(m - 1, k_max) - 1
    a = 0
    while True:
        c = _binom(m - 1, a)
        if w < c:
            break
        w -= c
        a += 1
    n = m - 1
    v = 1
    for i in range(1, a + 1):
        while True:
            c = _binom(n - v, a - i)
            if w < c:
                break
            w -= c
            v += 1
        out.append(v)
        v += 1
    out.append(m)
    return out


def min_hitting_subset(members, need_masks, long long cap):
    cdef list mem = list(members)
    cdef Py_ssize_t n = len(mem), nneed = len(need_masks)
    cdef Py_ssize_t size, i, j, top
    cdef unsigned long long t
    cdef bint ok
    if n > 63 or any(int(b) > 63 for b in mem) or any(int(x) >= (1 << 64) for x in need_masks):
        raise OverflowError("universe too large for 64-bit masks")
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] needs = np.asarray(
        [int(x) for x in need_masks], dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] bitval = np.asarray(
        [1 << int(b) for b in mem], dtype=np.uint64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] idx
    for j in range(nneed):
        if needs[j] == 0:
            return None
    top = cap if cap < n else n
    for size in range(top + 1):
        idx = np.arange(size, dtype=np.int64)
        while True:
            t = 0
            for i in range(size):
                t |= bitval[idx[i]]
            ok = True
            for j in range(nneed):
                if (t & needs[j]) == 0:
                    ok = False
                    break
            if ok:
                return [mem[idx[i]] for i in range(size)]
            # advance to the next combination in lexicographic order
            i = size - 1
            while i >= 0 and idx[i] == n - size + i:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, size):
                idx[j] = idx[j - 1] + 1
    return None


def extract_pair_bits(stream, long long n_bits):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] xs = np.ascontiguousarray(stream, dtype=np.int64)
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t t, j1 = -1, i, consumed
    cdef long long a, b, u, v
    cdef list bits = []
    cdef long long got = 0
    if n == 0:
        return bits, 0, None, None
    a = xs[0]
    for t in range(n):
        if xs[t] != a:
            j1 = t + 1
            break
    if j1 < 0:
        return bits, n, int(a), None
    b = xs[j1 - 1]
    consumed = j1
    i = j1 + 1
    while got < n_bits and 2 * (i + 1) <= n:
        u = xs[2 * i - 1]
        v = xs[2 * (i + 1) - 1]
        consumed = 2 * (i + 1)
        if u == a and v == b:
            bits.append(1)
            got += 1
        elif u == b and v == a:
            bits.append(0)
            got += 1
        i += 2
    return bits, consumed, int(a), int(b)


def run_counts(ident, int d):
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] idn = np.ascontiguousarray(ident, dtype=np.uint8)
    cdef Py_ssize_t size = 1 << d
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cnt = np.zeros(size, dtype=np.int64)
    cdef Py_ssize_t node, lo = 1 << (d - 1)
    for node in range(lo, size):
        cnt[node] = idn[node]
    for node in range(lo - 1, 0, -1):
        if idn[node]:
            cnt[node] = cnt[2 * node] + cnt[2 * node + 1]
    return cnt
