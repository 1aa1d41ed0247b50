"""Per-node state machine for secure accept-and-broadcast retrieval.

A regular node keeps a write-once memory vector of initial values indexed
by node label, accepts a neighbour's own value directly during the direct
phase, and afterwards accepts a label only when ``f + 1`` distinct,
unsuspected in-neighbours report the identical value.  Its scalar state is
an exponential filter of the running mean of accepted entries.

All transitions are pure: they return a new :class:`NodeState`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

__all__ = [
    "ProtocolError",
    "SafeInterval",
    "NeighborHistory",
    "NodeState",
    "InboundMessage",
    "PHI_MODES",
    "init_node",
    "make_broadcast",
    "receive_direct",
    "accept_by_vote",
    "detect_adversaries",
    "phi",
    "update_sync",
    "update_async",
    "retrieval_complete",
    "empty_memory",
]

PHI_MODES = ("include-all", "exclude-detected")

Memory = tuple  # tuple[Optional[float], ...]; label n lives at index n-1


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class SafeInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ProtocolError(f"empty safe interval [{self.lo}, {self.hi}]")

    def __contains__(self, v: float) -> bool:
        return self.lo <= v <= self.hi


@dataclass(frozen=True)
class NeighborHistory:
    last: Optional[Memory] = None
    seen: tuple = ()  # sorted ((label, frozenset(values)), ...)

    def values_for(self, label: int) -> frozenset:
        for n, vals in self.seen:
            if n == label:
                return vals
        return frozenset()

    def record(self, payload: Memory) -> "NeighborHistory":
        seen = dict(self.seen)
        for idx, v in enumerate(payload):
            if v is not None:
                seen[idx + 1] = seen.get(idx + 1, frozenset()) | {v}
        return NeighborHistory(payload, tuple(sorted(seen.items())))

    def changed_labels(self) -> list[int]:
        return [n for n, vals in self.seen if len(vals) > 1]


@dataclass(frozen=True)
class InboundMessage:
    sender: int
    payload: Memory
    sent_round: int
    delay: int = 0


@dataclass(frozen=True)
class NodeState:
    id: int
    x: float
    memory: Memory
    epsilon: float
    neighbor_history: dict = field(default_factory=dict)
    suspected: frozenset = frozenset()
    accepted_round: dict = field(default_factory=dict)
    poisoned: frozenset = frozenset()
    voted: frozenset = frozenset()  # labels accepted through an f+1 quorum

    @property
    def n_bar(self) -> int:
        return len(self.memory)

    def entry(self, label: int) -> Optional[float]:
        return self.memory[label - 1]

    def filled(self) -> list[int]:
        return [i + 1 for i, v in enumerate(self.memory) if v is not None]


def empty_memory(n_bar: int) -> Memory:
    return (None,) * n_bar


def _set(mem: Memory, label: int, value: float) -> Memory:
    lst = list(mem)
    lst[label - 1] = value
    return tuple(lst)


def init_node(id: int, x0: float, n_bar: int, epsilon: float = 0.0) -> NodeState:
    if not 0 <= epsilon < 1:
        raise ProtocolError(f"filter gain must lie in [0, 1), got {epsilon}")
    if not 1 <= id <= n_bar:
        raise ProtocolError(f"node {id} outside memory range 1..{n_bar}")
    x0 = float(x0)
    return NodeState(
        id=id,
        x=x0,
        memory=_set(empty_memory(n_bar), id, x0),
        epsilon=float(epsilon),
        accepted_round={id: 0},
    )


def make_broadcast(s: NodeState, k: int | None = None) -> Memory:
    """Payload for every out-neighbour; memory tuples are immutable snapshots."""
    return s.memory


def _record(history: dict, msg: InboundMessage) -> dict:
    out = dict(history)
    out[msg.sender] = out.get(msg.sender, NeighborHistory()).record(msg.payload)
    return out


def _payload_value(msg: InboundMessage, label: int) -> Optional[float]:
    if 1 <= label <= len(msg.payload):
        return msg.payload[label - 1]
    return None


def receive_direct(
    s: NodeState,
    msg: InboundMessage,
    f: int = 0,
    safe_interval: SafeInterval | None = None,
    k: int = 1,
) -> NodeState:
    """Take the sender's own-label value during the direct phase.

    An own value outside ``safe_interval`` marks the sender suspected and is
    not stored.  Late or duplicate directs only update the history.
    """
    history = _record(s.neighbor_history, msg)
    v = _payload_value(msg, msg.sender)
    if v is None or msg.sender == s.id:
        return replace(s, neighbor_history=history)
    if safe_interval is not None and v not in safe_interval:
        return replace(s, neighbor_history=history, suspected=s.suspected | {msg.sender})
    if s.entry(msg.sender) is not None or msg.sender in s.suspected:
        return replace(s, neighbor_history=history)
    accepted = dict(s.accepted_round)
    accepted[msg.sender] = k
    return replace(
        s,
        memory=_set(s.memory, msg.sender, v),
        neighbor_history=history,
        accepted_round=accepted,
    )


def _latest(inbox: Iterable[InboundMessage]) -> list[InboundMessage]:
    best: dict[int, InboundMessage] = {}
    for m in inbox:
        cur = best.get(m.sender)
        if cur is None or m.sent_round >= cur.sent_round:
            best[m.sender] = m
    return [best[j] for j in sorted(best)]


def accept_by_vote(
    s: NodeState, inbox: Sequence[InboundMessage], f: int, k: int = 0
) -> NodeState:
    """Accept each empty label reported identically by ``f + 1`` senders.

    Suspected senders are recorded but not counted.  Two distinct values both
    reaching quorum poison the label: it stays empty, is never accepted and
    its owner is suspected.
    """
    msgs = _latest(inbox)
    history = s.neighbor_history
    for m in msgs:
        history = _record(history, m)
    voters = [m for m in msgs if m.sender not in s.suspected and m.sender != s.id]
    memory = s.memory
    accepted = dict(s.accepted_round)
    poisoned = set(s.poisoned)
    suspected = set(s.suspected)
    voted = set(s.voted)
    for label in range(1, s.n_bar + 1):
        if memory[label - 1] is not None or label in poisoned:
            continue
        tally: dict[float, set] = {}
        for m in voters:
            v = _payload_value(m, label)
            if v is not None:
                tally.setdefault(v, set()).add(m.sender)
        quorum = sorted(v for v, who in tally.items() if len(who) >= f + 1)
        if len(quorum) == 1:
            memory = _set(memory, label, quorum[0])
            accepted[label] = k
            voted.add(label)
        elif len(quorum) > 1:
            poisoned.add(label)
            if label != s.id:
                suspected.add(label)
    return replace(
        s,
        memory=memory,
        neighbor_history=history,
        accepted_round=accepted,
        poisoned=frozenset(poisoned),
        suspected=frozenset(suspected),
        voted=frozenset(voted),
    )


def detect_adversaries(
    s: NodeState,
    inbox: Sequence[InboundMessage],
    f: int = 0,
    safe_interval: SafeInterval | None = None,
) -> NodeState:
    """Flag senders that contradict a trusted value, change a reported value,
    or claim an own value outside the safe interval.  Suspicion is permanent.

    Trusted values are the node's own and those accepted by quorum.  A value
    taken directly from its owner is not trusted here: an equivocating owner
    can hand different honest neighbours different values.
    """
    suspected = set(s.suspected)
    trusted = sorted(s.voted | {s.id})
    for m in _latest(inbox):
        j = m.sender
        if j == s.id or j in suspected:
            continue
        for label in trusted:
            v = _payload_value(m, label)
            if v is not None and v != s.memory[label - 1]:
                suspected.add(j)
                break
        else:
            hist = s.neighbor_history.get(j)
            if hist is not None and hist.changed_labels():
                suspected.add(j)
                continue
            own = _payload_value(m, j)
            if safe_interval is not None and own is not None and own not in safe_interval:
                suspected.add(j)
    if len(suspected) == len(s.suspected):
        return s
    return replace(s, suspected=frozenset(suspected))


def phi(s: NodeState, mode: str = "include-all") -> float:
    """Mean of the nonempty memory entries (the running cumulative average)."""
    if mode not in PHI_MODES:
        raise ProtocolError(f"unknown phi mode {mode!r}")
    vals = [
        v
        for idx, v in enumerate(s.memory)
        if v is not None and not (mode == "exclude-detected" and idx + 1 in s.suspected)
    ]
    return math.fsum(vals) / len(vals)


def update_sync(s: NodeState, mode: str = "include-all") -> NodeState:
    target = phi(s, mode)
    return replace(s, x=s.epsilon * s.x + (1.0 - s.epsilon) * target)


def update_async(s: NodeState, k: int, k_last: int, mode: str = "include-all") -> NodeState:
    """Filter step against the state held since the previous update ``k_last``."""
    if not k_last < k:
        raise ProtocolError(f"previous update round {k_last} must precede {k}")
    return update_sync(s, mode)


def retrieval_complete(s: NodeState, regular_labels: Iterable[int]) -> bool:
    return all(s.memory[n - 1] is not None for n in regular_labels)
