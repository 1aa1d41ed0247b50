from dataclasses import replace

import pytest

from byzavg.protocol import (
    InboundMessage,
    ProtocolError,
    SafeInterval,
    accept_by_vote,
    detect_adversaries,
    init_node,
    make_broadcast,
    phi,
    receive_direct,
    retrieval_complete,
    update_async,
    update_sync,
)

I = SafeInterval(0.0, 10.0)


def msg(sender, values, k=0, n_bar=6):
    payload = [None] * n_bar
    for label, v in values.items():
        payload[label - 1] = v
    return InboundMessage(sender, tuple(payload), k)


def with_memory(values, id=1, n_bar=6, epsilon=0.0):
    s = init_node(id, values[id], n_bar, epsilon)
    for label, v in values.items():
        if label != id:
            s = receive_direct(s, msg(label, {label: v}, n_bar=n_bar))
    return s


def test_init_node():
    s = init_node(3, 3.0, 6, 0)
    assert s.memory == (None, None, 3.0, None, None, None) and s.x == 3.0
    s = init_node(1, 0.0, 10, 0.5)
    assert s.entry(1) == 0.0 and s.memory.count(None) == 9
    with pytest.raises(ProtocolError):
        init_node(1, 0.0, 6, 1.0)
    with pytest.raises(ProtocolError):
        init_node(1, 0.0, 6, -0.1)
    with pytest.raises(ProtocolError):
        init_node(7, 0.0, 6)


def test_make_broadcast():
    s = init_node(1, 1.0, 4)
    assert make_broadcast(s, 1) == (1.0, None, None, None)
    s = receive_direct(s, msg(2, {2: 2.0}, n_bar=4))
    snap = make_broadcast(s, 2)
    assert snap[:2] == (1.0, 2.0)
    later = receive_direct(s, msg(3, {3: 3.0}, n_bar=4))
    assert snap == (1.0, 2.0, None, None)
    assert make_broadcast(later)[2] == 3.0


def test_receive_direct():
    s = init_node(2, 2.0, 6)
    s = receive_direct(s, msg(1, {1: 1.0}), k=1)
    assert s.entry(1) == 1.0 and s.accepted_round[1] == 1
    again = receive_direct(s, msg(1, {1: 1.0}), k=1)
    assert again.memory == s.memory and not again.suspected


def test_receive_direct_out_of_interval():
    s = receive_direct(init_node(2, 2.0, 6), msg(1, {1: 11.0}), safe_interval=I)
    assert s.entry(1) is None and s.suspected == {1}


def test_receive_direct_only_own_label():
    s = receive_direct(init_node(2, 2.0, 6), msg(1, {1: 1.0, 3: 3.0}))
    assert s.entry(3) is None and s.neighbor_history[1].values_for(3) == {3.0}


def test_vote_accepts_with_f_plus_one():
    s = init_node(3, 3.0, 6)
    s = accept_by_vote(s, [msg(2, {1: 1.0}), msg(5, {1: 1.0})], f=1, k=2)
    assert s.entry(1) == 1.0 and s.accepted_round[1] == 2


def test_vote_split_never_accepts():
    s = init_node(3, 3.0, 6)
    for k in range(2, 20):
        s = accept_by_vote(s, [msg(2, {1: 1.0}, k), msg(6, {1: 2.5}, k)], f=1, k=k)
    assert s.entry(1) is None


def test_vote_threshold_zero():
    s = accept_by_vote(init_node(3, 3.0, 6), [msg(2, {1: 7.0})], f=0, k=2)
    assert s.entry(1) == 7.0


def test_vote_excludes_suspected():
    s = init_node(3, 3.0, 6)
    s = replace(s, suspected=frozenset({5}))
    s = accept_by_vote(s, [msg(2, {1: 1.0}), msg(5, {1: 1.0})], f=1)
    assert s.entry(1) is None
    assert s.neighbor_history[5].values_for(1) == {1.0}


def test_vote_uses_latest_message_per_sender():
    s = init_node(3, 3.0, 6)
    inbox = [msg(2, {1: 9.0}, 1), msg(2, {1: 1.0}, 2), msg(5, {1: 1.0}, 2)]
    assert accept_by_vote(s, inbox, f=1).entry(1) == 1.0


def test_double_quorum_poisons_label():
    s = init_node(3, 3.0, 6)
    inbox = [msg(1, {4: 1.0}), msg(2, {4: 1.0}), msg(5, {4: 2.0}), msg(6, {4: 2.0})]
    s = accept_by_vote(s, inbox, f=1, k=2)
    assert s.entry(4) is None and 4 in s.poisoned and 4 in s.suspected
    s = accept_by_vote(s, [msg(1, {4: 1.0}), msg(2, {4: 1.0})], f=1, k=3)
    assert s.entry(4) is None


def test_write_once():
    s = init_node(3, 3.0, 6)
    s = accept_by_vote(s, [msg(2, {1: 1.0}), msg(5, {1: 1.0})], f=1)
    s = accept_by_vote(s, [msg(2, {1: 8.0}), msg(5, {1: 8.0})], f=1)
    s = receive_direct(s, msg(1, {1: 8.0}))
    assert s.entry(1) == 1.0


def test_detect_contradiction():
    s = accept_by_vote(init_node(3, 3.0, 6), [msg(2, {1: 1.0}), msg(5, {1: 1.0})], f=1)
    s = detect_adversaries(s, [msg(6, {1: 2.5})], f=1, safe_interval=I)
    assert s.suspected == {6}


def test_detect_changed_own_value():
    s = init_node(2, 2.0, 6)
    s = receive_direct(s, msg(4, {4: 4.0}, 1), k=1)
    inbox = [msg(4, {4: 1.5}, 3)]
    s = accept_by_vote(s, inbox, f=1, k=4)
    # the contradiction rule fires as well here; both are scenario-(ii) evidence
    assert 4 in detect_adversaries(s, inbox, 1, I).suspected


def test_detect_history_change_for_unaccepted_label():
    s = init_node(2, 2.0, 6)
    s = accept_by_vote(s, [msg(4, {5: 5.0}, 1)], f=1, k=2)
    s = accept_by_vote(s, [msg(4, {5: 1.5}, 2)], f=1, k=3)
    assert s.entry(5) is None
    assert detect_adversaries(s, [msg(4, {5: 1.5}, 2)], 1, I).suspected == {4}


def test_detect_out_of_interval():
    s = detect_adversaries(init_node(2, 2.0, 6), [msg(4, {4: -3.0})], 1, I)
    assert s.suspected == {4}


def test_detect_honest_unchanged():
    s = with_memory({1: 1.0, 2: 2.0, 3: 3.0})
    inbox = [msg(2, {1: 1.0, 2: 2.0}), msg(3, {3: 3.0, 1: 1.0})]
    s = accept_by_vote(s, inbox, 1)
    assert detect_adversaries(s, inbox, 1, I).suspected == frozenset()


def test_phi():
    s = with_memory({1: 1.0, 3: 3.0})
    assert phi(s) == 2.0
    assert phi(with_memory({i: float(i) for i in range(1, 7)})) == 3.5
    assert phi(init_node(1, 4.25, 6)) == 4.25


def test_phi_exclude_detected():
    s = with_memory({1: 1.0, 2: 2.0, 4: 6.0})
    s = replace(s, suspected=frozenset({4}))
    assert phi(s, "include-all") == 3.0
    assert phi(s, "exclude-detected") == 1.5
    with pytest.raises(ProtocolError):
        phi(s, "bogus")


def test_update_sync():
    s = with_memory({1: 1.0, 2: 2.0, 3: 3.0})
    assert update_sync(s).x == 2.0
    s = init_node(1, 2.0, 2, 0.5)
    s = receive_direct(s, msg(2, {2: 6.0}, n_bar=2))
    assert update_sync(s).x == 3.0  # 0.5 * 2 + 0.5 * 4


def test_update_sync_geometric_contraction():
    s = init_node(1, 0.0, 2, 0.3)
    s = receive_direct(s, msg(2, {2: 10.0}, n_bar=2))
    target = phi(s)
    prev = abs(s.x - target)
    for _ in range(10):
        s = update_sync(s)
        err = abs(s.x - target)
        assert err == pytest.approx(0.3 * prev, rel=1e-12)
        prev = err


def test_update_async():
    s = with_memory({1: 1.0, 3: 5.0}, epsilon=0.5)
    assert update_async(s, 1, 0).x == update_sync(s).x
    assert update_async(s, 4, 2).x == 2.0
    with pytest.raises(ProtocolError):
        update_async(s, 2, 2)


def test_update_async_zero_gain_jumps():
    s = with_memory({1: 1.0, 3: 5.0})
    assert update_async(s, 2, 0).x == 3.0


def test_retrieval_complete():
    full = with_memory({i: float(i) for i in range(1, 7)})
    assert retrieval_complete(full, {1, 2, 3, 5, 6})
    partial = with_memory({2: 2.0, 3: 3.0}, id=2)
    assert not retrieval_complete(partial, {1, 2, 3})
    assert retrieval_complete(init_node(4, 4.0, 6), {4})
