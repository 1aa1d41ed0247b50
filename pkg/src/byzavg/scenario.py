"""TOML scenario files.

Sections: ``graph``, ``protocol``, ``nodes``, ``adversaries``, ``schedule``.
Node-keyed tables use string keys (``"4" = ...``) as TOML requires.
"""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import digraph
from .adversary import strategy_from_dict
from .digraph import Digraph, EdgeListParseError, GraphError
from .protocol import ProtocolError, SafeInterval
from .simulator import ScenarioConfig, ScenarioError

__all__ = ["load_scenario", "parse_scenario", "build_graph"]

_SECTIONS = {"graph", "protocol", "nodes", "adversaries", "schedule"}
_FIELDS = {
    "graph": {"file", "edges", "generator", "n", "hub", "remove", "add"},
    "protocol": {"f", "n_bar", "k_max", "phi_mode", "safe_interval", "admissibility", "expected_average"},
    "nodes": {"initial", "epsilon"},
    "schedule": {
        "mode", "k_bar", "tau_bar", "seed", "update_rounds", "update_period",
        "default_period", "fixed_delay", "edge_delays",
    },
}


def _node_key(field: str, key: Any) -> int:
    try:
        return int(key)
    except (TypeError, ValueError):
        raise ScenarioError(field, f"node key {key!r} is not an integer") from None


def _node_map(field: str, table: Any, conv) -> dict:
    if not isinstance(table, Mapping):
        raise ScenarioError(field, "expected a table keyed by node label")
    try:
        return {_node_key(field, k): conv(v) for k, v in table.items()}
    except (TypeError, ValueError) as e:
        raise ScenarioError(field, str(e)) from None


def _num(field: str, v: Any, kind=int):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(field, f"expected a number, got {v!r}")
    if kind is int and not float(v).is_integer():
        raise ScenarioError(field, f"expected an integer, got {v!r}")
    return kind(v)


def build_graph(sec: Mapping, base: Path) -> Digraph:
    sources = [k for k in ("file", "edges", "generator") if k in sec]
    if len(sources) != 1:
        raise ScenarioError("graph", "give exactly one of file, edges, generator")
    try:
        if "file" in sec:
            g = digraph.parse_edge_list((base / sec["file"]).read_text(encoding="utf-8"))
        elif "edges" in sec:
            g = digraph.parse_edge_list(sec["edges"])
        else:
            g = _generate(sec)
        for pair in sec.get("remove", []):
            g = digraph.remove_edge(g, int(pair[0]), int(pair[1]), bidirectional=True)
        for pair in sec.get("add", []):
            g = digraph.add_edge(g, int(pair[0]), int(pair[1]), bidirectional=True)
    except OSError as e:
        raise ScenarioError("graph.file", str(e)) from None
    except EdgeListParseError as e:
        raise ScenarioError("graph.edges" if "edges" in sec else "graph.file", str(e)) from None
    except GraphError as e:
        raise ScenarioError("graph", str(e)) from None
    return g


def _generate(sec: Mapping) -> Digraph:
    name = sec["generator"]
    if name == "fig3":
        return digraph.fig3_graph()
    if "n" not in sec:
        raise ScenarioError("graph.n", f"generator {name!r} needs n")
    n = _num("graph.n", sec["n"])
    if name == "complete":
        return digraph.complete(n)
    if name == "cycle":
        return digraph.cycle_bidirectional(n)
    if name == "path":
        return digraph.directed_path(n)
    if name == "wheel":
        return digraph.wheel(n, _num("graph.hub", sec.get("hub", n)))
    raise ScenarioError("graph.generator", f"unknown generator {name!r}")


def _check_fields(doc: Mapping) -> None:
    for sec in doc:
        if sec not in _SECTIONS:
            raise ScenarioError(sec, "unknown section")
    for sec, allowed in _FIELDS.items():
        table = doc.get(sec, {})
        if not isinstance(table, Mapping):
            raise ScenarioError(sec, "expected a table")
        for key in table:
            if key not in allowed:
                raise ScenarioError(f"{sec}.{key}", "unknown field")


def parse_scenario(doc: Mapping, base: Path = Path(".")) -> ScenarioConfig:
    """Validated :class:`ScenarioConfig` from a decoded TOML document."""
    _check_fields(doc)
    if "graph" not in doc:
        raise ScenarioError("graph", "section is required")
    g = build_graph(doc["graph"], base)
    proto = doc.get("protocol", {})
    nodes = doc.get("nodes", {})
    sched = doc.get("schedule", {})

    if "f" not in proto:
        raise ScenarioError("protocol.f", "is required")
    f = _num("protocol.f", proto["f"])

    initial = nodes.get("initial", "label")
    if initial == "label":
        init = {i: float(i) for i in g.nodes}
    else:
        init = _node_map("nodes.initial", initial, lambda v: _num("nodes.initial", v, float))
    eps_raw = nodes.get("epsilon", 0.0)
    if isinstance(eps_raw, Mapping):
        eps = _node_map("nodes.epsilon", eps_raw, lambda v: _num("nodes.epsilon", v, float))
    else:
        eps = _num("nodes.epsilon", eps_raw, float)

    si = proto.get("safe_interval", [0.0, 10.0])
    if not isinstance(si, list) or len(si) != 2:
        raise ScenarioError("protocol.safe_interval", "expected [lo, hi]")
    try:
        interval = SafeInterval(_num("protocol.safe_interval", si[0], float),
                                _num("protocol.safe_interval", si[1], float))
    except ProtocolError as e:
        raise ScenarioError("protocol.safe_interval", str(e)) from None

    adversaries = {}
    adv_sec = doc.get("adversaries", {})
    if not isinstance(adv_sec, Mapping):
        raise ScenarioError("adversaries", "expected a table")
    for key, spec in adv_sec.items():
        node = _node_key("adversaries", key)
        if not isinstance(spec, Mapping):
            raise ScenarioError(f"adversaries.{key}", "expected a strategy table")
        try:
            adversaries[node] = strategy_from_dict(spec)
        except (ValueError, TypeError, AttributeError) as e:
            raise ScenarioError(f"adversaries.{key}", str(e)) from None

    edge_delays = {}
    for key, ds in sched.get("edge_delays", {}).items():
        try:
            j, i = (int(t) for t in str(key).split("-"))
            edge_delays[(j, i)] = [int(d) for d in ds]
        except ValueError:
            raise ScenarioError("schedule.edge_delays", f"bad entry {key!r}; use \"j-i\" = [d, ...]") from None

    opt = lambda sec, name, table: None if name not in table else _num(f"{sec}.{name}", table[name])  # noqa: E731
    cfg = ScenarioConfig(
        graph=g,
        f=f,
        initial_values=init,
        n_bar=opt("protocol", "n_bar", proto),
        safe_interval=interval,
        epsilon=eps,
        adversaries=adversaries,
        mode=sched.get("mode", "sync"),
        k_bar=_num("schedule.k_bar", sched.get("k_bar", 1)),
        tau_bar=_num("schedule.tau_bar", sched.get("tau_bar", 0)),
        k_max=opt("protocol", "k_max", proto),
        seed=_num("schedule.seed", sched.get("seed", 0)),
        phi_mode=proto.get("phi_mode", "include-all"),
        update_rounds=_node_map("schedule.update_rounds", sched.get("update_rounds", {}),
                                lambda v: [int(k) for k in v]),
        update_period=_node_map("schedule.update_period", sched.get("update_period", {}), int),
        default_period=opt("schedule", "default_period", sched),
        fixed_delay=opt("schedule", "fixed_delay", sched),
        edge_delays=edge_delays,
        admissibility=proto.get("admissibility", "f-local"),
        expected_average=(None if "expected_average" not in proto
                          else _num("protocol.expected_average", proto["expected_average"], float)),
    )
    for i in list(cfg.update_rounds) + list(cfg.update_period):
        if not 1 <= i <= g.node_count:
            raise ScenarioError("schedule", f"unknown node {i}")
    if isinstance(eps, dict):
        for i in eps:
            if not 1 <= i <= g.node_count:
                raise ScenarioError("nodes.epsilon", f"unknown node {i}")
    return cfg.normalized()


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ScenarioError("scenario", str(e)) from None
    except tomllib.TOMLDecodeError as e:
        raise ScenarioError("scenario", f"invalid TOML: {e}") from None
    return parse_scenario(doc, path.parent)
