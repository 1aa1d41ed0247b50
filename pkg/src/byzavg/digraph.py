"""Directed graphs on nodes ``1..N``, named generators and edge-list I/O.

Edges are ordered pairs ``(j, i)`` meaning *j transmits to i*.  Undirected
graphs are stored as both arcs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

__all__ = [
    "Digraph",
    "GraphError",
    "EdgeListParseError",
    "complete",
    "wheel",
    "cycle_bidirectional",
    "directed_path",
    "from_undirected",
    "remove_edge",
    "add_edge",
    "induced_subgraph",
    "parse_edge_list",
    "serialize_edge_list",
    "fig3_graph",
    "FIG3_EDGES",
]


class GraphError(ValueError):
    """Invalid node, edge or graph parameter."""


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Digraph:
    node_count: int
    edges: frozenset = field(default_factory=frozenset)
    _in: tuple = field(init=False, repr=False, compare=False)
    _out: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.node_count
        if not isinstance(n, int) or n < 1:
            raise GraphError(f"node_count must be a positive integer, got {n!r}")
        edges = frozenset((int(j), int(i)) for j, i in self.edges)
        ins = [set() for _ in range(n + 1)]
        outs = [set() for _ in range(n + 1)]
        for j, i in edges:
            if not (1 <= j <= n and 1 <= i <= n):
                raise GraphError(f"edge ({j}, {i}) has an endpoint outside 1..{n}")
            if j == i:
                raise GraphError(f"self-loop on node {i}")
            ins[i].add(j)
            outs[j].add(i)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_in", tuple(frozenset(s) for s in ins))
        object.__setattr__(self, "_out", tuple(frozenset(s) for s in outs))

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    def _check(self, i: int) -> None:
        if not 1 <= i <= self.node_count:
            raise GraphError(f"node {i} outside 1..{self.node_count}")

    def in_neighbors(self, i: int) -> frozenset:
        self._check(i)
        return self._in[i]

    def out_neighbors(self, i: int) -> frozenset:
        self._check(i)
        return self._out[i]

    def has_edge(self, j: int, i: int) -> bool:
        return (j, i) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def in_masks(self) -> list[int]:
        """In-neighbour bitmasks indexed ``0..N-1``; node ``i`` is bit ``i-1``."""
        return [sum(1 << (j - 1) for j in self._in[i]) for i in self.nodes]

    def in_degree(self, i: int) -> int:
        return len(self.in_neighbors(i))

    def is_symmetric(self) -> bool:
        return all((i, j) in self.edges for j, i in self.edges)

    def __iter__(self):
        return iter(self.sorted_edges())

    def __len__(self):
        return len(self.edges)


def complete(n: int) -> Digraph:
    if n < 1:
        raise GraphError("complete graph needs n >= 1")
    return Digraph(n, frozenset((j, i) for j in range(1, n + 1) for i in range(1, n + 1) if i != j))


def from_undirected(n: int, pairs: Iterable[tuple[int, int]]) -> Digraph:
    arcs = set()
    for a, b in pairs:
        arcs.add((a, b))
        arcs.add((b, a))
    return Digraph(n, frozenset(arcs))


def cycle_bidirectional(n: int) -> Digraph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return from_undirected(n, ((i, i % n + 1) for i in range(1, n + 1)))


def wheel(n: int, hub: int | None = None) -> Digraph:
    """Bidirectional rim cycle on the ``n-1`` non-hub nodes plus hub spokes."""
    if n < 4:
        raise GraphError("wheel needs n >= 4")
    hub = n if hub is None else hub
    if not 1 <= hub <= n:
        raise GraphError(f"hub {hub} outside 1..{n}")
    rim = [v for v in range(1, n + 1) if v != hub]
    pairs = [(rim[k], rim[(k + 1) % len(rim)]) for k in range(len(rim))]
    pairs += [(hub, v) for v in rim]
    return from_undirected(n, pairs)


def directed_path(n: int) -> Digraph:
    return Digraph(n, frozenset((i, i + 1) for i in range(1, n)))


def remove_edge(g: Digraph, j: int, i: int, bidirectional: bool = False) -> Digraph:
    drop = {(j, i), (i, j)} if bidirectional else {(j, i)}
    missing = drop - g.edges
    if missing:
        raise GraphError(f"edge(s) {sorted(missing)} not in graph")
    return Digraph(g.node_count, g.edges - drop)


def add_edge(g: Digraph, j: int, i: int, bidirectional: bool = False) -> Digraph:
    new = {(j, i), (i, j)} if bidirectional else {(j, i)}
    return Digraph(g.node_count, g.edges | new)


def induced_subgraph(g: Digraph, s: Iterable[int]) -> tuple[Digraph, dict[int, int]]:
    """Subgraph on ``s`` relabelled to ``1..|s|`` in increasing order.

    Returns the subgraph and the old->new label map.
    """
    members = sorted(set(s))
    if not members:
        raise GraphError("induced subgraph of an empty node set")
    for v in members:
        g._check(v)
    relabel = {old: new for new, old in enumerate(members, start=1)}
    edges = frozenset(
        (relabel[j], relabel[i]) for j, i in g.edges if j in relabel and i in relabel
    )
    return Digraph(len(members), edges), relabel


def parse_edge_list(text: str) -> Digraph:
    """Parse the ``n`` / ``e`` / ``u`` edge-list format (``#`` comments)."""
    n = None
    arcs: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag, args = parts[0], parts[1:]
        try:
            nums = [int(a) for a in args]
        except ValueError:
            raise EdgeListParseError(lineno, f"non-integer field in {line!r}") from None
        if tag == "n":
            if n is not None:
                raise EdgeListParseError(lineno, "duplicate 'n' header")
            if len(nums) != 1 or nums[0] < 1:
                raise EdgeListParseError(lineno, "header must be 'n <N>' with N >= 1")
            n = nums[0]
            continue
        if tag not in ("e", "u"):
            raise EdgeListParseError(lineno, f"unknown record type {tag!r}")
        if n is None:
            raise EdgeListParseError(lineno, "edge before 'n' header")
        if len(nums) != 2:
            raise EdgeListParseError(lineno, f"'{tag}' needs two node labels")
        a, b = nums
        for v in (a, b):
            if not 1 <= v <= n:
                raise EdgeListParseError(lineno, f"node {v} outside 1..{n}")
        if a == b:
            raise EdgeListParseError(lineno, f"self-loop on node {a}")
        arcs.add((a, b))
        if tag == "u":
            arcs.add((b, a))
    if n is None:
        raise EdgeListParseError(0, "missing 'n' header")
    return Digraph(n, frozenset(arcs))


def serialize_edge_list(g: Digraph, comment: str | None = None) -> str:
    """Canonical form: header then one ``e`` line per arc in sorted order."""
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(f"n {g.node_count}")
    lines += [f"e {j} {i}" for j, i in g.sorted_edges()]
    return "\n".join(lines) + "\n"


# Six-node strongly 3-robust witness containing {3,5}; removing {3,5} breaks
# strong 3-robustness and lets a constant liar at node 4 block retrieval.
# Reproduced by `byzavg search-fixture --n 6 --r 3 --must-contain-edge 3,5
# --break-on-removal --attack-node 4`.
FIG3_EDGES: tuple[tuple[int, int], ...] = (
    (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 3),
    (2, 4), (2, 6), (3, 4), (3, 5), (3, 6), (4, 5),
)


def fig3_graph() -> Digraph:
    return from_undirected(6, FIG3_EDGES)

