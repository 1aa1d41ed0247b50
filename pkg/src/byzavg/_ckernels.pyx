# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled subset-scan kernels; same contract as ``_pykernels``."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int popc(uint64_t x) noexcept nogil:
    return __builtin_popcountll(x)


cdef int _pool_bits(uint64_t pool, int *out) noexcept nogil:
    cdef int m = 0, b = 0
    while pool:
        if pool & 1:
            out[m] = b
            m += 1
        pool >>= 1
        b += 1
    return m


cdef struct SubsetIter:
    int pool[64]
    int idx[64]
    int m
    int k


cdef inline void it_init(SubsetIter *it, uint64_t pool) noexcept nogil:
    it.m = _pool_bits(pool, it.pool)
    it.k = 0


cdef inline bint it_next(SubsetIter *it, uint64_t *out) noexcept nogil:
    """Advance to the next subset in (size, lex) order; False when exhausted."""
    cdef int i, j
    cdef uint64_t mask
    if it.k == 0:
        if it.m == 0:
            return False
        it.k = 1
        it.idx[0] = 0
    else:
        i = it.k - 1
        while i >= 0 and it.idx[i] == it.m - it.k + i:
            i -= 1
        if i < 0:
            if it.k == it.m:
                return False
            it.k += 1
            for j in range(it.k):
                it.idx[j] = j
        else:
            it.idx[i] += 1
            for j in range(i + 1, it.k):
                it.idx[j] = it.idx[j - 1] + 1
    mask = 0
    for j in range(it.k):
        mask |= (<uint64_t>1) << it.pool[it.idx[j]]
    out[0] = mask
    return True


cdef uint64_t* _masks(in_masks, int n) except NULL:
    cdef uint64_t *buf = <uint64_t*>malloc(max(n, 1) * sizeof(uint64_t))
    if buf == NULL:
        raise MemoryError()
    for i in range(n):
        buf[i] = <uint64_t>in_masks[i]
    return buf


def canonical_subsets(pool):
    cdef SubsetIter it
    cdef uint64_t s
    it_init(&it, <uint64_t>pool)
    while it_next(&it, &s):
        yield int(s)


def strong_robust_scan(int n, in_masks, int r, bint early_exit):
    cdef uint64_t *inm = _masks(in_masks, n)
    cdef uint64_t full = ((<uint64_t>1) << n) - 1
    cdef uint64_t s, outside, rest
    cdef long long tests = 0
    cdef bint ok = True, satisfied
    cdef uint64_t witness = 0
    cdef int outside_count, b
    cdef SubsetIter it
    try:
        with nogil:
            it_init(&it, full)
            while it_next(&it, &s):
                outside = full & ~s
                outside_count = n - popc(s)
                satisfied = False
                rest = s
                while rest:
                    b = __builtin_ctzll(rest)
                    rest &= rest - 1
                    tests += outside_count
                    if popc(inm[b] & outside) >= r or (outside & ~inm[b]) == 0:
                        satisfied = True
                        if early_exit:
                            break
                if not satisfied and ok:
                    ok = False
                    witness = s
                    if early_exit:
                        break
    finally:
        free(inm)
    return bool(ok), int(witness), int(tests)


def strong_robust_wrt_scan(int n, in_masks, s_mask, int r):
    cdef uint64_t *inm = _masks(in_masks, n)
    cdef uint64_t full = ((<uint64_t>1) << n) - 1
    cdef uint64_t c, outside, rest
    cdef long long tests = 0
    cdef bint reach
    cdef int outside_count, b
    cdef SubsetIter it
    cdef uint64_t smask = <uint64_t>s_mask
    try:
        it_init(&it, full & ~smask)
        while it_next(&it, &c):
            outside = full & ~c
            outside_count = n - popc(c)
            reach = False
            rest = c
            while rest:
                b = __builtin_ctzll(rest)
                rest &= rest - 1
                tests += outside_count
                if popc(inm[b] & outside) >= r:
                    reach = True
                    break
            if not reach:
                return False, int(c), int(tests)
    finally:
        free(inm)
    return True, 0, int(tests)


def r_robust_scan(int n, in_masks, int r):
    cdef uint64_t *inm = _masks(in_masks, n)
    cdef uint64_t full = ((<uint64_t>1) << n) - 1
    cdef uint64_t total = (<uint64_t>1) << n
    cdef uint64_t *bad = <uint64_t*>malloc(total * sizeof(uint64_t))
    cdef long long nbad = 0, x, y
    cdef uint64_t s, outside, rest
    cdef bint reach
    cdef int b
    cdef SubsetIter it
    if bad == NULL:
        free(inm)
        raise MemoryError()
    try:
        with nogil:
            it_init(&it, full)
            while it_next(&it, &s):
                outside = full & ~s
                reach = False
                rest = s
                while rest:
                    b = __builtin_ctzll(rest)
                    rest &= rest - 1
                    if popc(inm[b] & outside) >= r:
                        reach = True
                        break
                if not reach:
                    bad[nbad] = s
                    nbad += 1
        for x in range(nbad):
            for y in range(x + 1, nbad):
                if bad[x] & bad[y] == 0:
                    return False, int(bad[x]), int(bad[y])
    finally:
        free(bad)
        free(inm)
    return True, 0, 0


def f_resilient_scan(int n, in_masks, int f, bint early_exit):
    cdef uint64_t *inm = _masks(in_masks, n)
    cdef uint64_t full = ((<uint64_t>1) << n) - 1
    cdef uint64_t sbit, pool_a, a, m, lset, rest, others
    cdef long long tests = 0
    cdef bint ok = True, satisfied, admissible, done = False
    cdef int s, b, eta, v
    cdef int ws = 0
    cdef uint64_t wa = 0, wm = 0
    cdef SubsetIter ita, itm
    try:
        with nogil:
            for s in range(n):
                if done:
                    break
                sbit = (<uint64_t>1) << s
                pool_a = full & ~sbit
                it_init(&ita, pool_a)
                while not done and it_next(&ita, &a):
                    admissible = True
                    others = full & ~a
                    while others:
                        v = __builtin_ctzll(others)
                        others &= others - 1
                        if popc(inm[v] & a) > f:
                            admissible = False
                            break
                    if not admissible and early_exit:
                        continue
                    it_init(&itm, pool_a & ~a)
                    while it_next(&itm, &m):
                        eta = popc(m)
                        lset = full & ~a & ~m
                        satisfied = False
                        rest = m
                        while rest:
                            b = __builtin_ctzll(rest)
                            rest &= rest - 1
                            tests += n - eta
                            if popc(inm[b] & a) <= f and (
                                popc(inm[b] & lset) >= f + 1 or (inm[b] & sbit) != 0
                            ):
                                satisfied = True
                                if early_exit:
                                    break
                        if admissible and not satisfied and ok:
                            ok = False
                            ws = s + 1
                            wa = a
                            wm = m
                            if early_exit:
                                done = True
                                break
    finally:
        free(inm)
    return bool(ok), ws, int(wa), int(wm), int(tests)

