import random

import pytest

import fuzz
from byzavg import digraph as d
from byzavg.adversary import ConstantLie, Equivocate, Silent, SwitchOwn
from byzavg.protocol import SafeInterval
from byzavg.robustness import disjoint_paths
from byzavg.simulator import (
    ScenarioConfig,
    ScenarioError,
    consensus_error,
    corrupted_labels,
    retrieval_rounds,
    run,
    run_async,
    run_sync,
)

LIAR = ConstantLie(frozenset({1, 2, 3, 5, 6}), 1.5, 1)


def fig3(graph=None, **kw):
    base = dict(
        graph=graph or d.fig3_graph(),
        f=1,
        initial_values={i: float(i) for i in range(1, 7)},
        adversaries={4: LIAR},
    )
    base.update(kw)
    return ScenarioConfig(**base)


def test_fig3_sync_exact():
    t = run_sync(fig3())
    assert t.horizon == 11
    assert all(e == 0.0 for e in consensus_error(t, 3.5).values())
    assert all(k is not None and k <= 11 for k in retrieval_rounds(t).values())
    assert not corrupted_labels(t)


def test_fig3_sync_retrieval_rounds_frozen():
    # observed on the pinned fixture
    assert retrieval_rounds(run(fig3())) == {1: 1, 2: 2, 3: 1, 5: 2, 6: 2}


def test_fig3_sync_detects_liar():
    t = run(fig3())
    for i in t.regular:
        assert (4 in t.final_states[i].suspected) == (i in d.fig3_graph().out_neighbors(4))
        assert not t.final_states[i].suspected & t.regular


def test_fig3_broken_edge_fails():
    t = run(fig3(d.remove_edge(d.fig3_graph(), 3, 5, True)))
    rounds = retrieval_rounds(t)
    err = consensus_error(t)
    assert any(rounds[i] is None and err[i] > 0.1 for i in rounds)
    assert not corrupted_labels(t)


def test_fig3_async_converges_with_smoothing():
    cfg = fig3(mode="async", k_bar=2, epsilon=0.5, update_period={5: 2, 6: 2}, default_period=1)
    t = run_async(cfg)
    assert t.horizon == 22
    assert t.update_rounds[5] == list(range(0, 23, 2))
    assert all(k is not None for k in retrieval_rounds(t).values())
    xs = t.x_series(5)
    assert all(xs[k] == xs[k - 1] for k in range(1, 23, 2))
    assert max(consensus_error(t).values()) < 1e-2


def test_async_degenerates_to_sync():
    for eps in (0.0, 0.5):
        s = run(fig3(epsilon=eps))
        a = run(fig3(epsilon=eps, mode="async", k_bar=1, tau_bar=0))
        assert s.trace_csv() == a.trace_csv()
        assert s.messages_csv() == a.messages_csv()


def test_random_delays_meet_async_bound():
    cfg = fig3(mode="async", k_bar=3, tau_bar=2, seed=17, epsilon=0.3)
    t = run(cfg)
    bound = (2 * 6 - 1) * (3 + 2)
    assert t.horizon == bound
    rounds = retrieval_rounds(t)
    assert all(k is not None and k <= bound for k in rounds.values())
    for m in t.messages:
        assert 0 <= m.delivered_round - m.sent_round <= 2


def test_schedules_respect_k_bar():
    t = run(fig3(mode="async", k_bar=3, tau_bar=1, seed=5))
    for rounds in t.update_rounds.values():
        assert rounds[0] == 0
        assert all(0 < b - a <= 3 for a, b in zip(rounds, rounds[1:]))
        assert t.horizon - rounds[-1] < 3


def test_sync_delivery_is_next_round():
    t = run(fig3())
    assert all(m.delivered_round == m.sent_round for m in t.messages)
    assert {m.sent_round for m in t.messages} == set(range(0, 12))


def test_silent_adversary_sends_nothing():
    t = run(fig3(adversaries={4: Silent()}))
    assert not any(m.sender == 4 for m in t.messages)


def test_explicit_schedule_and_delays():
    cfg = fig3(
        mode="async", k_bar=2, tau_bar=1,
        update_rounds={1: [0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32]},
        edge_delays={(2, 1): [1]}, fixed_delay=0,
    )
    t = run(cfg)
    assert t.update_rounds[1][:3] == [0, 2, 4]
    for m in t.messages:
        assert m.delivered_round - m.sent_round == (1 if (m.sender, m.receiver) == (2, 1) else 0)


def test_explicit_schedule_gap_rejected():
    with pytest.raises(ScenarioError) as e:
        run(fig3(mode="async", k_bar=2, update_rounds={1: [0, 3]}))
    assert e.value.field == "schedule.update_rounds"


@pytest.mark.parametrize(
    "kw,field",
    [
        (dict(mode="bogus"), "schedule.mode"),
        (dict(n_bar=3), "protocol.n_bar"),
        (dict(phi_mode="x"), "protocol.phi_mode"),
        (dict(epsilon=1.0), "nodes.epsilon"),
        (dict(initial_values={1: 1.0}), "nodes.initial"),
        (dict(adversaries={9: Silent()}), "adversaries"),
        (dict(mode="async", tau_bar=1, fixed_delay=2), "schedule.fixed_delay"),
        (dict(mode="async", k_bar=2, update_period={1: 3}), "schedule.update_period"),
    ],
)
def test_config_errors_name_field(kw, field):
    with pytest.raises(ScenarioError) as e:
        run(fig3(**kw))
    assert e.value.field == field


def test_run_mode_guards():
    with pytest.raises(ScenarioError):
        run_sync(fig3(mode="async"))
    with pytest.raises(ScenarioError):
        run_async(fig3())


def test_noncompliant_still_runs():
    cfg = ScenarioConfig(
        d.complete(4), 1, {i: float(i) for i in range(1, 5)},
        adversaries={1: LIAR, 2: LIAR},
    )
    t = run(cfg)
    assert not t.compliant and len(t.rows) == (t.horizon + 1) * 4


def test_single_node():
    t = run(ScenarioConfig(d.Digraph(1, frozenset()), 0, {1: 2.5}))
    assert retrieval_rounds(t) == {1: 0}
    assert consensus_error(t, 2.5) == {1: 0.0}
    assert t.horizon == 1


def test_wheel_equivocation_blocks_label_one():
    cfg = ScenarioConfig(
        d.wheel(6, 6), 1, {i: float(i) for i in range(1, 7)},
        adversaries={6: Equivocate({3: {1: 2.5}, 4: {1: 7.5}})}, k_max=50,
    )
    t = run(cfg)
    assert t.final_states[3].entry(1) is None and t.final_states[4].entry(1) is None
    assert retrieval_rounds(t)[3] is None and retrieval_rounds(t)[4] is None


def test_two_path_bottleneck_blocks_retrieval():
    # node 5 hears only from 1 and 2: two disjoint paths from 3, one runs through the liar
    g = d.Digraph(5, d.complete(4).edges | {(1, 5), (2, 5)})
    for i in (1, 2, 3, 4):
        g = d.add_edge(g, 5, i)
    assert disjoint_paths(g, 3, 5) == 2
    cfg = ScenarioConfig(g, 1, {i: float(i) for i in range(1, 6)},
                         adversaries={1: ConstantLie(frozenset({3, 4}), 9.0, 1)})
    assert run(cfg).final_states[5].entry(3) is None


def test_switch_own_detected():
    cfg = fig3(adversaries={4: SwitchOwn(4.0, 1.5, 3)})
    t = run(cfg)
    for i in t.regular & d.fig3_graph().out_neighbors(4):
        assert 4 in t.final_states[i].suspected


def test_out_of_interval_detected_and_not_stored():
    from byzavg.adversary import OutOfInterval
    t = run(fig3(adversaries={4: OutOfInterval(42.0)}))
    for i in t.regular:
        assert t.final_states[i].entry(4) is None
    for i in t.regular & d.fig3_graph().out_neighbors(4):
        assert 4 in t.final_states[i].suspected


def test_exclude_detected_mode_targets_regular_mean():
    t = run(fig3(phi_mode="exclude-detected"))
    assert t.expected_average == pytest.approx(17 / 5)
    err = consensus_error(t)
    # only out-neighbours of node 4 ever see it lie; node 6 keeps its value
    for i in t.regular:
        if i in d.fig3_graph().out_neighbors(4):
            assert err[i] == pytest.approx(0.0, abs=1e-12)
        else:
            assert t.final_states[i].x == 3.5


def test_corollary2_no_adversary():
    g = d.cycle_bidirectional(7)
    vals = {i: float(v) for i, v in enumerate([0.5, 9.0, 2.25, 7.0, 3.5, 1.0, 4.75], start=1)}
    t = run(ScenarioConfig(g, 0, vals))
    assert all(e == 0.0 for e in consensus_error(t, 4.0).values())


def test_consensus_error_examples():
    t = run(fig3(d.remove_edge(d.fig3_graph(), 3, 5, True)))
    assert max(consensus_error(t, 3.5).values()) > 0.1
    iso = run(ScenarioConfig(d.Digraph(2, frozenset()), 0, {1: 1.0, 2: 3.0}))
    assert consensus_error(iso, 1.0)[1] == 0.0


@pytest.mark.parametrize("eps", [0.0, 0.3, 0.7])
def test_filter_contracts_at_rate_epsilon(eps):
    cfg = fig3(mode="async", k_bar=2, epsilon=eps, update_period={5: 2, 6: 2}, default_period=1, k_max=60)
    t = run(cfg)
    for i in sorted(t.regular):
        done = t.retrieval_round[i]
        rows = [r for r in t.rows if r.node == i and r.updated and r.round > done]
        for a, b in zip(rows, rows[1:]):
            if a.phi != b.phi:
                continue
            before = abs(a.x - b.phi)
            if before < 1e-9:
                break
            assert abs(b.x - b.phi) == pytest.approx(eps * before, rel=1e-9, abs=1e-15)


def test_schur_convergence_closed_form():
    eps = 0.7
    t = run(fig3(epsilon=eps, k_max=40))
    for i in sorted(t.regular):
        phis = t.phi_series(i)
        pinned = max(k for k in range(1, 41) if phis[k] != phis[k - 1]) if any(
            phis[k] != phis[k - 1] for k in range(1, 41)) else 0
        xs = t.x_series(i)
        xa = phis[-1]
        for k in range(pinned, 41):
            assert xs[k] - xa == pytest.approx(eps ** (k - pinned) * (xs[pinned] - xa), abs=1e-12)


def test_determinism_and_byte_identity():
    cfg = fig3(mode="async", k_bar=3, tau_bar=2, seed=99, epsilon=0.5)
    a, b = run(cfg), run(cfg)
    assert a.trace_csv() == b.trace_csv() and a.messages_csv() == b.messages_csv()


def test_trace_csv_columns():
    t = run(fig3())
    lines = t.trace_csv().splitlines()
    assert lines[0] == "round,node,role,x,lambda,accepted_labels,suspected,updated_this_round"
    assert len(lines) == 1 + 12 * 6
    assert t.messages_csv().splitlines()[0] == "sent_round,delivered_round,sender,receiver"
    adv = [ln for ln in lines[1:] if ln.split(",")[2] == "adversary"]
    assert all(ln.split(",")[3] == "" for ln in adv)


def test_write_once_along_trace():
    rng = random.Random(3)
    for _ in range(10):
        cfg = fuzz.random_resilience_case(rng, n=6, f=1)
        cfg.k_max = 15
        t = run(cfg)
        for i in t.regular:
            seen = {}
            for r in (r for r in t.rows if r.node == i):
                for lab in r.new_labels:
                    assert lab not in seen
                    seen[lab] = r.round


def test_theorem1_bound_small_sample():
    rng = random.Random(2024)
    for _ in range(25):
        cfg = fuzz.random_resilience_case(rng)
        t = run(cfg)
        n = cfg.graph.node_count
        assert all(k is not None and k <= 2 * n - 1 for k in retrieval_rounds(t).values())
        assert not corrupted_labels(t)


def test_theorem5_bound_small_sample():
    rng = random.Random(77)
    for _ in range(20):
        cfg = fuzz.random_resilience_case(rng, mode="async")
        t = run(cfg)
        n = cfg.graph.node_count
        bound = (2 * n - 1) * (cfg.k_bar + cfg.tau_bar)
        assert all(k is not None and k <= bound for k in retrieval_rounds(t).values())
        assert not corrupted_labels(t)


def test_custom_safe_interval():
    cfg = fig3(safe_interval=SafeInterval(0.0, 3.0))
    t = run(cfg)
    # own values 4, 5, 6 now look out of range and are rejected
    assert t.final_states[1].entry(5) is None
