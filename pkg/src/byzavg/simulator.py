"""Deterministic discrete-round execution of the retrieval protocol.

Timing model: a node that updates at round ``k`` broadcasts its post-update
memory stamped ``sent_round = k``; with delay ``d`` it is delivered at
``k + d`` and can be consumed from round ``k + d + 1`` on.  Synchronous runs
are the special case where every node updates every round and ``d = 0``,
so round ``k`` consumes exactly the memories of round ``k - 1``.
"""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .adversary import (
    AdversaryStrategy,
    adversary_emit,
    is_f_local_admissible,
    is_f_total_admissible,
)
from .digraph import Digraph
from .protocol import (
    PHI_MODES,
    InboundMessage,
    NodeState,
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

__all__ = [
    "ScenarioError",
    "ScenarioConfig",
    "NodeRow",
    "MessageRecord",
    "SimulationTrace",
    "run",
    "run_sync",
    "run_async",
    "consensus_error",
    "retrieval_rounds",
    "corrupted_labels",
    "TRACE_COLUMNS",
    "MESSAGE_COLUMNS",
]

TRACE_COLUMNS = (
    "round", "node", "role", "x", "lambda", "accepted_labels", "suspected", "updated_this_round",
)
MESSAGE_COLUMNS = ("sent_round", "delivered_round", "sender", "receiver")


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` names the offending setting."""

    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


@dataclass
class ScenarioConfig:
    graph: Digraph
    f: int
    initial_values: Mapping[int, float]
    n_bar: Optional[int] = None
    safe_interval: SafeInterval = SafeInterval(0.0, 10.0)
    epsilon: Mapping[int, float] | float = 0.0
    adversaries: Mapping[int, AdversaryStrategy] = field(default_factory=dict)
    mode: str = "sync"
    k_bar: int = 1
    tau_bar: int = 0
    k_max: Optional[int] = None
    seed: int = 0
    phi_mode: str = "include-all"
    update_rounds: Mapping[int, list] = field(default_factory=dict)
    update_period: Mapping[int, int] = field(default_factory=dict)
    default_period: Optional[int] = None
    fixed_delay: Optional[int] = None
    edge_delays: Mapping[tuple, list] = field(default_factory=dict)
    admissibility: str = "f-local"
    expected_average: Optional[float] = None

    @property
    def nodes(self) -> range:
        return self.graph.nodes

    @property
    def regular(self) -> frozenset:
        return frozenset(i for i in self.nodes if i not in self.adversaries)

    def gain(self, i: int) -> float:
        if isinstance(self.epsilon, Mapping):
            return float(self.epsilon.get(i, 0.0))
        return float(self.epsilon)

    def horizon(self) -> int:
        if self.k_max is not None:
            return self.k_max
        n = self.graph.node_count
        return (2 * n - 1) * (self.k_bar + self.tau_bar)

    def compliant(self) -> bool:
        adv = set(self.adversaries)
        if self.admissibility == "f-local":
            return is_f_local_admissible(self.graph, adv, self.f)
        if self.admissibility == "f-total":
            return is_f_total_admissible(adv, self.f)
        return True

    def expected(self) -> float:
        """Target average: scenario override, else the mean over the labels
        the phi mode keeps (all nodes for include-all, regular ones otherwise).
        """
        if self.expected_average is not None:
            return float(self.expected_average)
        keep = self.nodes if self.phi_mode == "include-all" else sorted(self.regular)
        vals = [float(self.initial_values[i]) for i in keep]
        return math.fsum(vals) / len(vals)

    def normalized(self) -> "ScenarioConfig":
        """Validated copy; synchronous mode pins ``k_bar = 1`` and ``tau_bar = 0``."""
        g = self.graph
        n = g.node_count
        cfg = replace(self)
        if cfg.mode not in ("sync", "async"):
            raise ScenarioError("schedule.mode", f"must be 'sync' or 'async', got {cfg.mode!r}")
        if cfg.mode == "sync":
            cfg.k_bar, cfg.tau_bar = 1, 0
        if cfg.f < 0:
            raise ScenarioError("protocol.f", "must be >= 0")
        if cfg.n_bar is None:
            cfg.n_bar = n
        if cfg.n_bar < n:
            raise ScenarioError("protocol.n_bar", f"must be >= N={n}")
        if cfg.phi_mode not in PHI_MODES:
            raise ScenarioError("protocol.phi_mode", f"must be one of {PHI_MODES}")
        if cfg.admissibility not in ("f-local", "f-total", "none"):
            raise ScenarioError("protocol.admissibility", "must be f-local, f-total or none")
        if cfg.k_bar < 1:
            raise ScenarioError("schedule.k_bar", "must be >= 1")
        if cfg.tau_bar < 0:
            raise ScenarioError("schedule.tau_bar", "must be >= 0")
        missing = [i for i in g.nodes if i not in cfg.initial_values]
        if missing:
            raise ScenarioError("nodes.initial", f"no initial value for node(s) {missing}")
        extra = [i for i in cfg.initial_values if not 1 <= i <= n]
        if extra:
            raise ScenarioError("nodes.initial", f"unknown node(s) {extra}")
        for i in g.nodes:
            if not 0 <= cfg.gain(i) < 1:
                raise ScenarioError("nodes.epsilon", f"gain of node {i} outside [0, 1)")
        bad = [i for i in cfg.adversaries if not 1 <= i <= n]
        if bad:
            raise ScenarioError("adversaries", f"unknown node(s) {bad}")
        if cfg.horizon() < 0:
            raise ScenarioError("protocol.k_max", "must be >= 0")
        for (j, i), ds in cfg.edge_delays.items():
            if not g.has_edge(j, i):
                raise ScenarioError("schedule.edge_delays", f"({j},{i}) is not an edge")
            if not ds or any(not 0 <= d <= cfg.tau_bar for d in ds):
                raise ScenarioError("schedule.edge_delays", f"delays on ({j},{i}) must lie in [0, tau_bar]")
        if cfg.fixed_delay is not None and not 0 <= cfg.fixed_delay <= cfg.tau_bar:
            raise ScenarioError("schedule.fixed_delay", "must lie in [0, tau_bar]")
        for i, p in cfg.update_period.items():
            if not 1 <= p <= cfg.k_bar:
                raise ScenarioError("schedule.update_period", f"period of node {i} must lie in [1, k_bar]")
        if cfg.default_period is not None and not 1 <= cfg.default_period <= cfg.k_bar:
            raise ScenarioError("schedule.default_period", "must lie in [1, k_bar]")
        return cfg


@dataclass(frozen=True)
class NodeRow:
    round: int
    node: int
    role: str
    x: Optional[float]
    lam: Optional[int]
    new_labels: tuple
    suspected: tuple
    updated: bool
    phi: Optional[float] = None


@dataclass(frozen=True)
class MessageRecord:
    sent_round: int
    delivered_round: int
    sender: int
    receiver: int


@dataclass
class SimulationTrace:
    config: ScenarioConfig
    horizon: int
    regular: frozenset
    adversarial: frozenset
    compliant: bool
    rows: list = field(default_factory=list)
    messages: list = field(default_factory=list)
    retrieval_round: dict = field(default_factory=dict)
    final_states: dict = field(default_factory=dict)
    update_rounds: dict = field(default_factory=dict)
    suspicion_events: list = field(default_factory=list)
    adversary_payloads: dict = field(default_factory=dict)

    @property
    def expected_average(self) -> float:
        return self.config.expected()

    def x_series(self, node: int) -> list:
        return [r.x for r in self.rows if r.node == node]

    def phi_series(self, node: int) -> list:
        return [r.phi for r in self.rows if r.node == node]

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.rows:
            w.writerow([
                r.round,
                r.node,
                r.role,
                "" if r.x is None else repr(r.x),
                "" if r.lam is None else r.lam,
                " ".join(map(str, r.new_labels)),
                " ".join(map(str, r.suspected)),
                int(r.updated),
            ])
        return buf.getvalue()

    def messages_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(MESSAGE_COLUMNS)
        for m in self.messages:
            w.writerow([m.sent_round, m.delivered_round, m.sender, m.receiver])
        return buf.getvalue()


def _schedules(cfg: ScenarioConfig, horizon: int, rng: random.Random) -> dict:
    out = {}
    for i in cfg.nodes:
        if cfg.mode == "sync":
            rounds = list(range(horizon + 1))
        elif i in cfg.update_rounds:
            rounds = sorted(set(int(k) for k in cfg.update_rounds[i]) | {0})
            rounds = [k for k in rounds if k <= horizon]
            for a, b in zip(rounds, rounds[1:] + [None]):
                if (b is None and a + cfg.k_bar <= horizon) or (b is not None and b - a > cfg.k_bar):
                    raise ScenarioError(
                        "schedule.update_rounds", f"node {i} goes more than k_bar={cfg.k_bar} rounds without updating"
                    )
        else:
            period = cfg.update_period.get(i, cfg.default_period)
            if period is not None:
                rounds = list(range(0, horizon + 1, period))
            else:
                rounds = [0]
                while True:
                    nxt = rounds[-1] + rng.randint(1, cfg.k_bar)
                    if nxt > horizon:
                        break
                    rounds.append(nxt)
        out[i] = rounds
    return out


def run(cfg: ScenarioConfig) -> SimulationTrace:
    """Execute a scenario to its horizon (never stops early)."""
    cfg = cfg.normalized()
    g = cfg.graph
    horizon = cfg.horizon()
    rng = random.Random(cfg.seed)
    sched = _schedules(cfg, horizon, rng)
    sched_sets = {i: set(r) for i, r in sched.items()}
    regular = cfg.regular
    adversarial = frozenset(cfg.adversaries)
    regular_labels = sorted(regular)
    interval = cfg.safe_interval
    direct_until = cfg.k_bar + cfg.tau_bar

    states: dict[int, NodeState] = {
        i: init_node(i, cfg.initial_values[i], cfg.n_bar, cfg.gain(i) if i in regular else 0.0)
        for i in g.nodes
    }
    trace = SimulationTrace(cfg, horizon, regular, adversarial, cfg.compliant())
    trace.update_rounds = {i: list(r) for i, r in sched.items()}
    # receiver -> sender -> list of (delivered_round, message)
    buffers: dict[int, dict[int, list]] = {i: {} for i in g.nodes}
    edge_seq: dict[tuple, int] = {}

    def delay_for(j: int, i: int) -> int:
        if (j, i) in cfg.edge_delays:
            ds = cfg.edge_delays[(j, i)]
            n = edge_seq.get((j, i), 0)
            edge_seq[(j, i)] = n + 1
            return int(ds[min(n, len(ds) - 1)])
        if cfg.fixed_delay is not None:
            return cfg.fixed_delay
        if cfg.tau_bar == 0:
            return 0
        return rng.randint(0, cfg.tau_bar)

    def send(k: int) -> None:
        for j in g.nodes:
            if k not in sched_sets[j]:
                continue
            emitted = {}
            for i in sorted(g.out_neighbors(j)):
                if j in adversarial:
                    payload = adversary_emit(
                        cfg.adversaries[j], k, i, cfg.n_bar, j, make_broadcast(states[j], k)
                    )
                    emitted[i] = payload
                    if payload is None:
                        continue
                else:
                    payload = make_broadcast(states[j], k)
                d = delay_for(j, i)
                msg = InboundMessage(j, payload, k, d)
                buffers[i].setdefault(j, []).append((k + d, msg))
                trace.messages.append(MessageRecord(k, k + d, j, i))
            if j in adversarial:
                trace.adversary_payloads[(k, j)] = emitted

    def record(k: int, prev: dict, updated: set) -> None:
        for i in g.nodes:
            s = states[i]
            if i in adversarial:
                trace.rows.append(NodeRow(k, i, "adversary", None, None, (), (), i in updated))
                continue
            new = tuple(sorted(n for n, rk in s.accepted_round.items() if rk == k and n != i))
            susp = tuple(sorted(s.suspected))
            for v in sorted(s.suspected - (prev[i].suspected if prev else frozenset())):
                trace.suspicion_events.append((k, i, v))
            trace.rows.append(
                NodeRow(k, i, "regular", s.x, len(s.filled()), new, susp, i in updated, phi(s, cfg.phi_mode))
            )
            if i not in trace.retrieval_round and retrieval_complete(s, regular_labels):
                trace.retrieval_round[i] = k

    # round 0: x_i[0] = phi_i[0] = own initial value
    record(0, {}, set(g.nodes))
    send(0)
    last_update = {i: 0 for i in g.nodes}
    for k in range(1, horizon + 1):
        prev = dict(states)
        updated = set()
        new_states = {}
        for i in g.nodes:
            if k not in sched_sets[i]:
                continue
            inbox = []
            for j, pending in buffers[i].items():
                ready = [(dr, m) for dr, m in pending if dr < k]
                if not ready:
                    continue
                latest = max(ready, key=lambda t: t[1].sent_round)
                inbox.append(latest[1])
                buffers[i][j] = [latest] + [(dr, m) for dr, m in pending if dr >= k]
            inbox.sort(key=lambda m: m.sender)
            s = states[i]
            if k <= direct_until:
                for m in inbox:
                    s = receive_direct(s, m, cfg.f, interval, k)
            else:
                s = accept_by_vote(s, inbox, cfg.f, k)
            s = detect_adversaries(s, inbox, cfg.f, interval)
            if i in regular:
                if cfg.mode == "sync":
                    s = update_sync(s, cfg.phi_mode)
                else:
                    s = update_async(s, k, last_update[i], cfg.phi_mode)
            last_update[i] = k
            new_states[i] = s
            updated.add(i)
        states.update(new_states)
        record(k, prev, updated)
        send(k)
    trace.final_states = dict(states)
    return trace


def run_sync(cfg: ScenarioConfig) -> SimulationTrace:
    if cfg.mode != "sync":
        raise ScenarioError("schedule.mode", "run_sync needs mode = 'sync'")
    return run(cfg)


def run_async(cfg: ScenarioConfig) -> SimulationTrace:
    if cfg.mode != "async":
        raise ScenarioError("schedule.mode", "run_async needs mode = 'async'")
    return run(cfg)


def consensus_error(trace: SimulationTrace, expected: float | None = None) -> dict:
    """``|x_i[K] - expected|`` for every regular node."""
    target = trace.expected_average if expected is None else expected
    return {i: abs(trace.final_states[i].x - target) for i in sorted(trace.regular)}


def retrieval_rounds(trace: SimulationTrace) -> dict:
    """First round each regular node held every regular label, or ``None``."""
    return {i: trace.retrieval_round.get(i) for i in sorted(trace.regular)}


def corrupted_labels(trace: SimulationTrace) -> dict:
    """Regular labels whose stored value differs from the true initial value."""
    out = {}
    truth = trace.config.initial_values
    for i in sorted(trace.regular):
        mem = trace.final_states[i].memory
        bad = [n for n in sorted(trace.regular) if mem[n - 1] is not None and mem[n - 1] != float(truth[n])]
        if bad:
            out[i] = bad
    return out
