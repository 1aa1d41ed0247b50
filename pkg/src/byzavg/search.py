"""Fixture-graph search and random graph sampling."""
from __future__ import annotations

import random
from itertools import combinations
from typing import Iterator, Optional

from .adversary import ConstantLie, is_f_local_admissible
from .digraph import Digraph, from_undirected, remove_edge
from .robustness import (
    ConnectivityCategory,
    connectivity_category,
    is_f_resilient,
    is_strongly_r_robust,
)
from .simulator import ScenarioConfig, consensus_error, retrieval_rounds, run

__all__ = [
    "random_digraph",
    "random_undirected",
    "sample_strongly_robust",
    "sample_f_local_set",
    "attack_breaks",
    "find_fixture",
    "implication_frequencies",
]

# exhaustive enumeration up to this many free edge slots, sampling beyond
_ENUM_LIMIT = 20


def random_digraph(n: int, p: float, rng: random.Random) -> Digraph:
    return Digraph(
        n,
        frozenset(
            (j, i)
            for j in range(1, n + 1)
            for i in range(1, n + 1)
            if i != j and rng.random() < p
        ),
    )


def random_undirected(n: int, p: float, rng: random.Random) -> Digraph:
    return from_undirected(
        n, [(a, b) for a, b in combinations(range(1, n + 1), 2) if rng.random() < p]
    )


def sample_strongly_robust(
    n: int, r: int, rng: random.Random, p_range=(0.6, 1.0), directed: bool = True, max_tries: int = 100_000
) -> Digraph:
    """Rejection-sample a strongly r-robust digraph on ``n`` nodes."""
    for _ in range(max_tries):
        p = rng.uniform(*p_range)
        g = random_digraph(n, p, rng) if directed else random_undirected(n, p, rng)
        if is_strongly_r_robust(g, r).verdict:
            return g
    raise RuntimeError(f"no strongly {r}-robust graph on {n} nodes after {max_tries} draws")


def sample_f_local_set(g: Digraph, f: int, rng: random.Random, max_size: Optional[int] = None) -> frozenset:
    """Random f-local admissible adversary set (greedy random insertion)."""
    order = list(g.nodes)
    rng.shuffle(order)
    limit = rng.randint(0, max_size if max_size is not None else g.node_count // 2)
    chosen: set[int] = set()
    for v in order:
        if len(chosen) >= limit:
            break
        if is_f_local_admissible(g, chosen | {v}, f) and len(chosen) + 1 < g.node_count:
            chosen.add(v)
    return frozenset(chosen)


def attack_breaks(g: Digraph, attacker: int, f: int = 1, lie: float = 1.5, tol: float = 0.1) -> bool:
    """True when a constant liar at ``attacker`` leaves some regular node with
    incomplete retrieval and final error above ``tol`` (initial values ``x_i = i``).
    """
    n = g.node_count
    cfg = ScenarioConfig(
        g,
        f,
        {i: float(i) for i in g.nodes},
        safe_interval=_interval(n),
        adversaries={attacker: ConstantLie(frozenset(set(g.nodes) - {attacker}), lie, 1)},
    )
    t = run(cfg)
    rounds = retrieval_rounds(t)
    err = consensus_error(t)
    return any(rounds[i] is None and err[i] > tol for i in rounds)


def _interval(n: int):
    from .protocol import SafeInterval

    return SafeInterval(0.0, float(max(10, n)))


def _candidates(n: int, forced: list, seed: int, max_edges: Optional[int]) -> Iterator[Digraph]:
    free = [p for p in combinations(range(1, n + 1), 2) if p not in forced]
    top = len(free) if max_edges is None else max(0, min(len(free), max_edges - len(forced)))
    if len(free) <= _ENUM_LIMIT:
        for k in range(top + 1):
            for extra in combinations(free, k):
                yield from_undirected(n, [*forced, *extra])
        return
    rng = random.Random(seed)
    while True:
        k = rng.randint(0, top)
        yield from_undirected(n, [*forced, *rng.sample(free, k)])


def find_fixture(
    n: int,
    r: int,
    must_contain: Optional[tuple] = None,
    break_on_removal: bool = False,
    seed: int = 0,
    max_edges: Optional[int] = None,
    attack_node: Optional[int] = None,
    max_samples: int = 200_000,
) -> Optional[Digraph]:
    """First undirected graph (as a digraph) meeting every constraint.

    Small instances are enumerated by increasing edge count, lexicographic
    within a count; large ones are sampled with ``seed``.  With
    ``attack_node``, the edge-removed graph must also fail retrieval under a
    constant liar at that node while the intact graph succeeds.
    Returns ``None`` when the search space is exhausted.
    """
    forced = [tuple(sorted(must_contain))] if must_contain else []
    if break_on_removal and not forced:
        raise ValueError("break_on_removal needs must_contain")
    for count, g in enumerate(_candidates(n, forced, seed, max_edges)):
        if count >= max_samples:
            return None
        if not is_strongly_r_robust(g, r).verdict:
            continue
        if break_on_removal:
            a, b = forced[0]
            broken = remove_edge(g, a, b, bidirectional=True)
            if is_strongly_r_robust(broken, r).verdict:
                continue
            if attack_node is not None:
                if attack_breaks(g, attack_node) or not attack_breaks(broken, attack_node):
                    continue
        return g
    return None


def implication_frequencies(
    n: int, f: int, samples: int, rng: random.Random, p_range=(0.5, 1.0)
) -> dict:
    """Empirical co-occurrence of strong (2f+1)-robustness and f-resiliency."""
    counts = {"both": 0, "robust_only": 0, "resilient_only": 0, "neither": 0}
    r = 2 * f + 1
    for _ in range(samples):
        g = random_digraph(n, rng.uniform(*p_range), rng)
        rob = r <= -(-n // 2) and is_strongly_r_robust(g, r).verdict
        res = is_f_resilient(g, f).verdict
        key = "both" if rob and res else "robust_only" if rob else "resilient_only" if res else "neither"
        counts[key] += 1
    return counts


def is_strongly_connected(g: Digraph) -> bool:
    return connectivity_category(g) == ConnectivityCategory.C3
