"""Decision procedures for graph robustness and connectivity.

The exponential subset scans run in :mod:`byzavg.kernels` (compiled when
available).  Checkers that count basic edge tests accept ``audit=True``,
which disables every early exit so the count depends on ``N`` only.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, NamedTuple

from . import kernels
from .digraph import Digraph, GraphError

__all__ = [
    "OpCounter",
    "RobustnessReport",
    "ResilienceWitness",
    "ConnectivityCategory",
    "is_r_reachable",
    "is_r_robust",
    "is_strongly_r_robust",
    "is_strongly_r_robust_wrt",
    "is_f_resilient",
    "connectivity_category",
    "reachability",
    "disjoint_paths",
    "strong_connectivity",
    "max_strong_robustness",
    "predicted_tests_strong_robustness",
    "predicted_tests_f_resilience",
    "mask_to_nodes",
    "nodes_to_mask",
]


@dataclass
class OpCounter:
    tests: int = 0
    early_exit_enabled: bool = True


class ResilienceWitness(NamedTuple):
    source: int
    adversaries: frozenset
    m: frozenset
    l: frozenset


@dataclass
class RobustnessReport:
    kind: str
    params: dict
    verdict: bool
    witness: object = None
    counter: OpCounter = field(default_factory=OpCounter)

    def __bool__(self) -> bool:
        return self.verdict


class ConnectivityCategory(enum.IntEnum):
    C0 = 0  # disconnected
    C1 = 1  # weakly, not unilaterally
    C2 = 2  # unilaterally, not strongly
    C3 = 3  # strongly connected


def mask_to_nodes(mask: int) -> frozenset:
    out = set()
    b = 0
    while mask:
        if mask & 1:
            out.add(b + 1)
        mask >>= 1
        b += 1
    return frozenset(out)


def nodes_to_mask(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << (v - 1)
    return m


def _check_size(g: Digraph) -> None:
    if g.node_count > kernels.MAX_NODES:
        raise GraphError(f"subset scans support at most {kernels.MAX_NODES} nodes")


def _check_r(g: Digraph, r: int) -> None:
    top = -(-g.node_count // 2)
    if not 1 <= r <= top:
        raise GraphError(f"r={r} outside 1..ceil(N/2)={top}")


def _subset(g: Digraph, s: Iterable[int]) -> frozenset:
    s = frozenset(s)
    if not s:
        raise GraphError("node subset must be nonempty")
    for v in s:
        g._check(v)
    return s


def is_r_reachable(g: Digraph, s: Iterable[int], r: int) -> bool:
    s = _subset(g, s)
    if r < 1:
        raise GraphError("r must be >= 1")
    return any(len(g.in_neighbors(i) - s) >= r for i in s)


def is_r_robust(g: Digraph, r: int) -> RobustnessReport:
    """Every pair of disjoint nonempty subsets has an r-reachable member.

    Witness on failure: the first violating pair ``(S1, S2)``.
    """
    if g.node_count < 2:
        raise GraphError("r-robustness needs N >= 2")
    _check_r(g, r)
    _check_size(g)
    ok, m1, m2 = kernels.r_robust_scan(g.node_count, g.in_masks(), r)
    witness = None if ok else (mask_to_nodes(m1), mask_to_nodes(m2))
    return RobustnessReport("r_robust", {"r": r}, ok, witness)


def is_strongly_r_robust(g: Digraph, r: int, audit: bool = False) -> RobustnessReport:
    """Every nonempty S is r-reachable or has a member fed by all of V \\ S.

    Counts ``N - |S|`` tests per member examined.  With ``audit`` the scan
    never stops early, giving ``predicted_tests_strong_robustness(N)`` tests.
    """
    _check_r(g, r)
    _check_size(g)
    ok, wit, tests = kernels.strong_robust_scan(g.node_count, g.in_masks(), r, not audit)
    return RobustnessReport(
        "strongly_r_robust",
        {"r": r},
        ok,
        None if ok else mask_to_nodes(wit),
        OpCounter(tests, not audit),
    )


def is_strongly_r_robust_wrt(
    g: Digraph, s: Iterable[int], r: int, allow_large_r: bool = False
) -> RobustnessReport:
    """Every nonempty subset of ``V \\ s`` is r-reachable.

    ``r`` must not exceed ``|s|`` unless ``allow_large_r`` is set; the
    condition itself is well defined for any ``r >= 1``.
    """
    s = _subset(g, s)
    if r < 1 or (r > len(s) and not allow_large_r):
        raise GraphError(f"r={r} must satisfy 1 <= r <= |S|={len(s)}")
    _check_size(g)
    ok, wit, tests = kernels.strong_robust_wrt_scan(
        g.node_count, g.in_masks(), nodes_to_mask(s), r
    )
    return RobustnessReport(
        "strongly_r_robust_wrt",
        {"r": r, "set": sorted(s)},
        ok,
        None if ok else mask_to_nodes(wit),
        OpCounter(tests, True),
    )


def is_f_resilient(g: Digraph, f: int, audit: bool = False) -> RobustnessReport:
    """Exhaustive f-resiliency check over every (source, A, M) partition.

    A triple passes when some node of ``M`` has at most ``f`` in-neighbours
    in ``A`` and either ``f+1`` in-neighbours in ``L`` or an edge from the
    source.  Triples whose ``A`` is not f-local are vacuous.
    """
    if f < 1:
        raise GraphError("f must be >= 1")
    if g.node_count < 3:
        raise GraphError("f-resiliency check needs N >= 3")
    _check_size(g)
    n = g.node_count
    ok, s, a, m, tests = kernels.f_resilient_scan(n, g.in_masks(), f, not audit)
    witness = None
    if not ok:
        full = (1 << n) - 1
        witness = ResilienceWitness(
            s, mask_to_nodes(a), mask_to_nodes(m), mask_to_nodes(full & ~a & ~m)
        )
    return RobustnessReport("f_resilient", {"f": f}, ok, witness, OpCounter(tests, not audit))


def reachability(g: Digraph) -> list[int]:
    """``reach[i-1]`` is the bitmask of nodes reachable from ``i`` (itself included)."""
    n = g.node_count
    outs = [0] * n
    for j, i in g.edges:
        outs[j - 1] |= 1 << (i - 1)
    reach = []
    for start in range(n):
        seen = 1 << start
        frontier = seen
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= outs[low.bit_length() - 1]
                f ^= low
            frontier = nxt & ~seen
            seen |= nxt
        reach.append(seen)
    return reach


def connectivity_category(g: Digraph) -> ConnectivityCategory:
    n = g.node_count
    reach = reachability(g)
    full = (1 << n) - 1
    if all(r == full for r in reach):
        return ConnectivityCategory.C3
    if all(
        (reach[i] >> j) & 1 or (reach[j] >> i) & 1 for i in range(n) for j in range(i + 1, n)
    ):
        return ConnectivityCategory.C2
    und = Digraph(n, g.edges | frozenset((i, j) for j, i in g.edges))
    if reachability(und)[0] == full:
        return ConnectivityCategory.C1
    return ConnectivityCategory.C0


def disjoint_paths(g: Digraph, i: int, j: int) -> int:
    """Maximum number of internally node-disjoint directed paths ``i -> j``.

    Unit-capacity max flow on the split graph (each node ``v`` becomes
    ``v_in -> v_out`` with capacity 1; ``i`` and ``j`` are not capacitated).
    """
    g._check(i)
    g._check(j)
    if i == j:
        raise GraphError("disjoint paths need distinct endpoints")
    n = g.node_count
    # vertex v: v_in = 2(v-1), v_out = 2(v-1)+1
    cap: dict[int, dict[int, int]] = {x: {} for x in range(2 * n)}

    def arc(u: int, w: int, c: int) -> None:
        cap[u][w] = cap[u].get(w, 0) + c
        cap[w].setdefault(u, 0)

    big = n
    for v in g.nodes:
        arc(2 * (v - 1), 2 * (v - 1) + 1, big if v in (i, j) else 1)
    for a, b in g.edges:
        arc(2 * (a - 1) + 1, 2 * (b - 1), 1)
    src, dst = 2 * (i - 1) + 1, 2 * (j - 1)
    flow = 0
    while True:
        parent = {src: src}
        q = deque([src])
        while q and dst not in parent:
            u = q.popleft()
            for w, c in cap[u].items():
                if c > 0 and w not in parent:
                    parent[w] = u
                    q.append(w)
        if dst not in parent:
            return flow
        w = dst
        while w != src:
            u = parent[w]
            cap[u][w] -= 1
            cap[w][u] += 1
            w = u
        flow += 1


def strong_connectivity(g: Digraph) -> int:
    """Fewest node removals leaving a non-strong or single-node digraph.

    Minimum of :func:`disjoint_paths` over ordered non-adjacent pairs; a
    digraph where every ordered pair is adjacent gets ``N - 1``.
    """
    if connectivity_category(g) != ConnectivityCategory.C3:
        raise GraphError("strong connectivity is defined for strongly connected digraphs")
    best = g.node_count - 1
    for i in g.nodes:
        for j in g.nodes:
            if i != j and not g.has_edge(i, j):
                best = min(best, disjoint_paths(g, i, j))
    return best


def max_strong_robustness(g: Digraph) -> int:
    best = 0
    for r in range(1, -(-g.node_count // 2) + 1):
        if not is_strongly_r_robust(g, r).verdict:
            break
        best = r
    return best


def predicted_tests_strong_robustness(n: int) -> int:
    """Full-scan test count: sum over subset sizes k of C(n,k)(n-k)k."""
    if n < 1:
        raise GraphError("n must be >= 1")
    return sum(comb(n, k) * (n - k) * k for k in range(1, n + 1))


def predicted_tests_f_resilience(n: int) -> int:
    """Full-scan test count: n * sum_a C(n-1,a) sum_m C(n-a-1,m) m(n-m)."""
    if n < 3:
        raise GraphError("n must be >= 3")
    return n * sum(
        comb(n - 1, a) * sum(comb(n - a - 1, m) * m * (n - m) for m in range(1, n - a))
        for a in range(1, n)
    )
