"""Pure-Python subset-scan kernels (fallback for the compiled ``_ckernels``).

Node ``i`` of an ``n``-node graph is bit ``i-1``; ``in_masks[i-1]`` holds the
in-neighbours of node ``i``.  Subsets are visited in canonical order:
increasing cardinality, then lexicographic on the sorted member labels.
Both backends must return identical tuples for identical inputs.
"""
from __future__ import annotations

from itertools import combinations


def _bits(mask: int) -> list[int]:
    out = []
    b = 0
    while mask:
        if mask & 1:
            out.append(b)
        mask >>= 1
        b += 1
    return out


def canonical_subsets(pool: int):
    """Yield nonempty submasks of ``pool`` in canonical order."""
    bits = _bits(pool)
    for k in range(1, len(bits) + 1):
        for combo in combinations(bits, k):
            m = 0
            for b in combo:
                m |= 1 << b
            yield m


def strong_robust_scan(n: int, in_masks, r: int, early_exit: bool):
    """Return ``(ok, witness_mask, tests)``."""
    full = (1 << n) - 1
    tests = 0
    ok = True
    witness = 0
    for s in canonical_subsets(full):
        outside = full & ~s
        outside_count = n - s.bit_count()
        satisfied = False
        for b in _bits(s):
            tests += outside_count
            inm = in_masks[b]
            if (inm & outside).bit_count() >= r or (outside & ~inm) == 0:
                satisfied = True
                if early_exit:
                    break
        if not satisfied and ok:
            ok = False
            witness = s
            if early_exit:
                break
    return ok, witness, tests


def strong_robust_wrt_scan(n: int, in_masks, s_mask: int, r: int):
    """Every nonempty ``C`` outside ``s_mask`` must be r-reachable."""
    full = (1 << n) - 1
    tests = 0
    for c in canonical_subsets(full & ~s_mask):
        outside = full & ~c
        outside_count = n - c.bit_count()
        reach = False
        for b in _bits(c):
            tests += outside_count
            if (in_masks[b] & outside).bit_count() >= r:
                reach = True
                break
        if not reach:
            return False, c, tests
    return True, 0, tests


def _reachable_table(n: int, in_masks, r: int) -> list[bool]:
    full = (1 << n) - 1
    table = [False] * (1 << n)
    for s in range(1, 1 << n):
        outside = full & ~s
        for b in _bits(s):
            if (in_masks[b] & outside).bit_count() >= r:
                table[s] = True
                break
    return table


def r_robust_scan(n: int, in_masks, r: int):
    """Return ``(ok, s1, s2)``; on failure the first disjoint pair, neither r-reachable."""
    full = (1 << n) - 1
    table = _reachable_table(n, in_masks, r)
    bad = [s for s in canonical_subsets(full) if not table[s]]
    for idx, s1 in enumerate(bad):
        for s2 in bad[idx + 1:]:
            if s1 & s2 == 0:
                return False, s1, s2
    return True, 0, 0


def f_resilient_scan(n: int, in_masks, f: int, early_exit: bool):
    """Return ``(ok, source, a_mask, m_mask, tests)``.

    A triple whose ``A`` is not f-local over ``V \\ A`` is vacuously satisfied,
    but its member tests are still counted when ``early_exit`` is off.
    """
    full = (1 << n) - 1
    tests = 0
    ok = True
    wit = (0, 0, 0)
    for s in range(n):
        sbit = 1 << s
        pool_a = full & ~sbit
        for a in canonical_subsets(pool_a):
            admissible = all(
                (in_masks[v] & a).bit_count() <= f for v in _bits(full & ~a)
            )
            if not admissible and early_exit:
                continue
            for m in canonical_subsets(pool_a & ~a):
                eta = m.bit_count()
                lset = full & ~a & ~m
                satisfied = False
                for b in _bits(m):
                    tests += n - eta
                    inm = in_masks[b]
                    if (inm & a).bit_count() <= f and (
                        (inm & lset).bit_count() >= f + 1 or inm & sbit
                    ):
                        satisfied = True
                        if early_exit:
                            break
                if admissible and not satisfied and ok:
                    ok = False
                    wit = (s + 1, a, m)
                    if early_exit:
                        return ok, wit[0], wit[1], wit[2], tests
    return ok, wit[0], wit[1], wit[2], tests
