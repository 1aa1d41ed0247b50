"""Scripted Byzantine behaviours and adversary-set admissibility checks.

Every strategy starts from the payload the node would send if it were
honest (its shadow memory) and rewrites it.  ``k`` is the round the payload
is sent in, i.e. the payload stands for the sender's memory at round ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .digraph import Digraph

__all__ = [
    "ConstantLie",
    "SwitchOwn",
    "Equivocate",
    "OutOfInterval",
    "Silent",
    "Honest",
    "AdversaryStrategy",
    "adversary_emit",
    "is_f_local_admissible",
    "is_f_total_admissible",
    "strategy_from_dict",
    "strategy_to_dict",
]


@dataclass(frozen=True)
class ConstantLie:
    target_labels: frozenset
    value: float
    from_round: int = 1


@dataclass(frozen=True)
class SwitchOwn:
    honest_value: float
    new_value: float
    switch_round: int

    def __post_init__(self):
        if self.switch_round < 1:
            raise ValueError("switch_round must be >= 1")


@dataclass(frozen=True)
class Equivocate:
    # out-neighbour -> {label: value}
    per_neighbor: Mapping = field(default_factory=dict)
    from_round: int = 1


@dataclass(frozen=True)
class OutOfInterval:
    value: float


@dataclass(frozen=True)
class Silent:
    pass


@dataclass(frozen=True)
class Honest:
    pass


AdversaryStrategy = Union[ConstantLie, SwitchOwn, Equivocate, OutOfInterval, Silent, Honest]


def _override(base: tuple, updates: Mapping) -> tuple:
    out = list(base)
    for label, v in updates.items():
        if 1 <= label <= len(out):
            out[label - 1] = float(v)
    return tuple(out)


def adversary_emit(
    strategy: AdversaryStrategy,
    k: int,
    neighbor: int,
    n_bar: int,
    own_id: int,
    honest_payload: Optional[tuple] = None,
) -> Optional[tuple]:
    """Payload sent to ``neighbor`` at round ``k``; ``None`` means no message.

    ``honest_payload`` is what a regular node in the same position would send
    (defaults to an empty vector).  Equivocate falls back to it for unmapped
    neighbours.
    """
    base = tuple(honest_payload) if honest_payload is not None else (None,) * n_bar
    if isinstance(strategy, Honest):
        return base
    if isinstance(strategy, Silent):
        return None
    if isinstance(strategy, ConstantLie):
        if k < strategy.from_round:
            return base
        return _override(base, {n: strategy.value for n in strategy.target_labels})
    if isinstance(strategy, SwitchOwn):
        v = strategy.honest_value if k < strategy.switch_round else strategy.new_value
        return _override(base, {own_id: v})
    if isinstance(strategy, OutOfInterval):
        return _override(base, {own_id: strategy.value})
    if isinstance(strategy, Equivocate):
        if k < strategy.from_round or neighbor not in strategy.per_neighbor:
            return base
        return _override(base, strategy.per_neighbor[neighbor])
    raise TypeError(f"unknown strategy {strategy!r}")


def is_f_local_admissible(g: Digraph, adversaries: Iterable[int], f: int) -> bool:
    """Every regular node has at most ``f`` adversarial in-neighbours."""
    a = frozenset(adversaries)
    return all(len(g.in_neighbors(i) & a) <= f for i in g.nodes if i not in a)


def is_f_total_admissible(adversaries: Iterable[int], f: int) -> bool:
    return len(frozenset(adversaries)) <= f


_KINDS = {
    "constant-lie": ConstantLie,
    "switch-own": SwitchOwn,
    "equivocate": Equivocate,
    "out-of-interval": OutOfInterval,
    "silent": Silent,
    "honest": Honest,
}


def strategy_from_dict(d: Mapping) -> AdversaryStrategy:
    """Build a strategy from a scenario table such as
    ``{"strategy": "constant-lie", "labels": [1, 2], "value": 1.5}``.
    """
    d = dict(d)
    kind = d.pop("strategy", None)
    if kind not in _KINDS:
        raise ValueError(f"strategy must be one of {sorted(_KINDS)}, got {kind!r}")
    try:
        if kind == "constant-lie":
            out = ConstantLie(
                frozenset(int(n) for n in d.pop("labels")),
                float(d.pop("value")),
                int(d.pop("from_round", 1)),
            )
        elif kind == "switch-own":
            out = SwitchOwn(
                float(d.pop("honest_value")), float(d.pop("new_value")), int(d.pop("switch_round"))
            )
        elif kind == "equivocate":
            per = {
                int(nb): {int(lab): float(v) for lab, v in labels.items()}
                for nb, labels in d.pop("per_neighbor").items()
            }
            out = Equivocate(per, int(d.pop("from_round", 1)))
        elif kind == "out-of-interval":
            out = OutOfInterval(float(d.pop("value")))
        else:
            out = _KINDS[kind]()
    except KeyError as e:
        raise ValueError(f"strategy {kind!r} is missing field {e.args[0]!r}") from None
    if d:
        raise ValueError(f"strategy {kind!r} has unknown field(s) {sorted(d)}")
    return out


def strategy_to_dict(s: AdversaryStrategy) -> dict:
    if isinstance(s, ConstantLie):
        return {"strategy": "constant-lie", "labels": sorted(s.target_labels),
                "value": s.value, "from_round": s.from_round}
    if isinstance(s, SwitchOwn):
        return {"strategy": "switch-own", "honest_value": s.honest_value,
                "new_value": s.new_value, "switch_round": s.switch_round}
    if isinstance(s, Equivocate):
        return {"strategy": "equivocate", "from_round": s.from_round,
                "per_neighbor": {str(k): {str(l): v for l, v in m.items()}
                                 for k, m in s.per_neighbor.items()}}
    if isinstance(s, OutOfInterval):
        return {"strategy": "out-of-interval", "value": s.value}
    return {"strategy": "silent" if isinstance(s, Silent) else "honest"}
