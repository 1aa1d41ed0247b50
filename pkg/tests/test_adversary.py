import pytest

from byzavg import digraph as d
from byzavg.adversary import (
    ConstantLie,
    Equivocate,
    Honest,
    OutOfInterval,
    Silent,
    SwitchOwn,
    adversary_emit,
    is_f_local_admissible,
    is_f_total_admissible,
    strategy_from_dict,
    strategy_to_dict,
)

HONEST = (None, None, None, 4.0, None, None)


def test_constant_lie_all_labels():
    s = ConstantLie(frozenset(range(1, 7)), 1.5, 1)
    assert adversary_emit(s, 2, 1, 6, 4) == (1.5,) * 6


def test_constant_lie_before_start_is_honest():
    s = ConstantLie(frozenset({1, 2, 3, 5, 6}), 1.5, 2)
    assert adversary_emit(s, 1, 1, 6, 4, HONEST) == HONEST
    assert adversary_emit(s, 2, 1, 6, 4, HONEST) == (1.5, 1.5, 1.5, 4.0, 1.5, 1.5)


def test_equivocate_differs_per_neighbor():
    s = Equivocate({3: {1: 2.5}, 4: {1: 7.5}})
    base = (None, None, None, None, None, 6.0)
    to3 = adversary_emit(s, 2, 3, 6, 6, base)
    to4 = adversary_emit(s, 2, 4, 6, 6, base)
    assert to3[0] == 2.5 and to4[0] == 7.5 and to3 != to4
    assert adversary_emit(s, 2, 1, 6, 6, base) == base


def test_honest_equals_regular_broadcast():
    assert adversary_emit(Honest(), 5, 2, 6, 4, HONEST) == HONEST


def test_silent_sends_nothing():
    assert adversary_emit(Silent(), 1, 2, 6, 4, HONEST) is None


def test_switch_own():
    s = SwitchOwn(4.0, 9.0, 3)
    assert adversary_emit(s, 2, 1, 6, 4, HONEST)[3] == 4.0
    assert adversary_emit(s, 3, 1, 6, 4, HONEST)[3] == 9.0
    with pytest.raises(ValueError):
        SwitchOwn(1.0, 2.0, 0)


def test_out_of_interval():
    assert adversary_emit(OutOfInterval(42.0), 0, 1, 6, 4, HONEST)[3] == 42.0


def test_f_local_examples():
    assert is_f_local_admissible(d.fig3_graph(), {4}, 1)
    assert is_f_local_admissible(d.wheel(6, 6), {6}, 1)
    assert not is_f_local_admissible(d.complete(4), {1, 2}, 1)


def test_f_total_examples():
    assert is_f_total_admissible({4}, 1)
    assert not is_f_total_admissible({1, 2}, 1)
    assert is_f_total_admissible(set(), 0)


@pytest.mark.parametrize(
    "strategy",
    [
        ConstantLie(frozenset({1, 2}), 1.5, 3),
        SwitchOwn(4.0, 1.5, 11),
        Equivocate({3: {1: 2.5}, 4: {1: 7.5}}, 2),
        OutOfInterval(-1.0),
        Silent(),
        Honest(),
    ],
)
def test_strategy_dict_round_trip(strategy):
    assert strategy_from_dict(strategy_to_dict(strategy)) == strategy


@pytest.mark.parametrize(
    "spec,fragment",
    [
        ({"strategy": "nope"}, "strategy must be"),
        ({"strategy": "constant-lie", "value": 1.0}, "labels"),
        ({"strategy": "silent", "value": 1.0}, "unknown field"),
    ],
)
def test_strategy_errors(spec, fragment):
    with pytest.raises(ValueError, match=fragment):
        strategy_from_dict(spec)
