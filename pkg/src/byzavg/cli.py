"""``byzavg`` command line.

Exit codes: 0 success or true verdict, 1 false verdict or exhausted
search, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import digraph, kernels
from .digraph import GraphError
from .robustness import (
    ConnectivityCategory,
    RobustnessReport,
    connectivity_category,
    disjoint_paths,
    is_f_resilient,
    is_r_robust,
    is_strongly_r_robust,
    is_strongly_r_robust_wrt,
    predicted_tests_f_resilience,
    predicted_tests_strong_robustness,
    strong_connectivity,
)
from .scenario import load_scenario
from .search import find_fixture, implication_frequencies
from .simulator import ScenarioError, consensus_error, retrieval_rounds, run

EXIT_OK, EXIT_FALSE, EXIT_USAGE = 0, 1, 2


class _Usage(Exception):
    pass


def _nodes(ns) -> str:
    return " ".join(str(v) for v in sorted(ns)) if ns else "-"


def _read_graph(path: str) -> digraph.Digraph:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
        return digraph.parse_edge_list(text)
    except OSError as e:
        raise _Usage(f"cannot read graph: {e}") from None
    except GraphError as e:
        raise _Usage(f"{path}: {e}") from None


def format_report(rep: RobustnessReport, predicted: int | None) -> str:
    """Text serialization: one ``field: value`` line per report field."""
    params = " ".join(
        f"{k}={_nodes(v) if isinstance(v, list) else v}" for k, v in rep.params.items()
    )
    w = rep.witness
    if w is None:
        witness = "-"
    elif rep.kind == "f_resilient":
        witness = f"s={w.source} A={_nodes(w.adversaries)} M={_nodes(w.m)} L={_nodes(w.l)}"
    elif rep.kind == "r_robust":
        witness = f"S1={_nodes(w[0])} S2={_nodes(w[1])}"
    else:
        witness = _nodes(w)
    counted = rep.counter.tests if rep.kind != "r_robust" else "-"
    lines = [
        f"kind: {rep.kind}",
        f"params: {params}",
        f"verdict: {str(rep.verdict).lower()}",
        f"witness: {witness}",
        f"tests_counted: {counted}",
        f"predicted_tests: {'-' if predicted is None else predicted}",
        f"early_exit: {str(rep.counter.early_exit_enabled).lower()}",
    ]
    return "\n".join(lines)


def cmd_check(args) -> int:
    g = _read_graph(args.graph)
    n = g.node_count
    predicted = None
    try:
        if args.kind == "robust":
            rep = is_r_robust(g, _need(args.r, "--r"))
        elif args.kind == "strong-robust":
            rep = is_strongly_r_robust(g, _need(args.r, "--r"), audit=args.audit)
            predicted = predicted_tests_strong_robustness(n)
        elif args.kind == "strong-robust-wrt":
            if not args.set:
                raise _Usage("--kind strong-robust-wrt needs --set")
            rep = is_strongly_r_robust_wrt(g, _parse_set(args.set), _need(args.r, "--r"))
        else:
            rep = is_f_resilient(g, _need(args.f, "--f"), audit=args.audit)
            predicted = predicted_tests_f_resilience(n)
    except GraphError as e:
        raise _Usage(str(e)) from None
    print(format_report(rep, predicted))
    if args.audit and predicted is not None:
        print(f"audit: counted={rep.counter.tests} predicted={predicted} "
              f"match={str(rep.counter.tests == predicted).lower()}")
    return EXIT_OK if rep.verdict else EXIT_FALSE


def _need(v, flag):
    if v is None:
        raise _Usage(f"{flag} is required for this kind")
    return v


def _parse_set(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise _Usage(f"--set expects node labels, got {text!r}") from None


def cmd_connectivity(args) -> int:
    g = _read_graph(args.graph)
    cat = connectivity_category(g)
    print(f"category: {cat.name}")
    if cat == ConnectivityCategory.C3:
        print(f"kappa3: {strong_connectivity(g)}")
    if args.paths:
        print("paths:")
        for i in g.nodes:
            row = ["-" if i == j else str(disjoint_paths(g, i, j)) for j in g.nodes]
            print(" ".join(row))
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        if args.family == "complete":
            g = digraph.complete(args.n)
        elif args.family == "wheel":
            g = digraph.wheel(args.n, args.hub)
        elif args.family == "cycle":
            g = digraph.cycle_bidirectional(args.n)
        else:
            g = digraph.directed_path(args.n)
    except GraphError as e:
        raise _Usage(str(e)) from None
    sys.stdout.write(digraph.serialize_edge_list(g))
    return EXIT_OK


def cmd_search(args) -> int:
    edge = None
    if args.must_contain_edge:
        try:
            a, b = (int(t) for t in args.must_contain_edge.split(","))
        except ValueError:
            raise _Usage("--must-contain-edge expects 'a,b'") from None
        if a == b or not (1 <= a <= args.n and 1 <= b <= args.n):
            raise _Usage(f"--must-contain-edge {a},{b} is not a valid pair for n={args.n}")
        edge = (a, b)
    if args.break_on_removal and edge is None:
        raise _Usage("--break-on-removal needs --must-contain-edge")
    if args.attack_node is not None and not args.break_on_removal:
        raise _Usage("--attack-node needs --break-on-removal")
    if args.n < 1 or not 1 <= args.r <= -(-args.n // 2):
        raise _Usage(f"need n >= 1 and 1 <= r <= ceil(n/2)")
    g = find_fixture(
        args.n, args.r, edge, args.break_on_removal, args.seed, args.max_edges, args.attack_node
    )
    if g is None:
        print("search exhausted: no graph meets the constraints", file=sys.stderr)
        return EXIT_FALSE
    comment = f"strongly {args.r}-robust" + (f", contains {edge[0]}-{edge[1]}" if edge else "")
    sys.stdout.write(digraph.serialize_edge_list(g, comment))
    return EXIT_OK


def _fmt(v) -> str:
    return "-" if v is None else repr(v)


def summarize(trace) -> str:
    cfg = trace.config
    rounds = retrieval_rounds(trace)
    errors = consensus_error(trace)
    lines = [
        f"mode: {cfg.mode}",
        f"nodes: {cfg.graph.node_count}",
        f"f: {cfg.f}",
        f"horizon: {trace.horizon}",
        f"k_bar: {cfg.k_bar}",
        f"tau_bar: {cfg.tau_bar}",
        f"phi_mode: {cfg.phi_mode}",
        f"adversaries: {_nodes(trace.adversarial)}",
        f"compliant: {str(trace.compliant).lower()}",
        f"expected_average: {trace.expected_average!r}",
    ]
    incomplete = [i for i, k in rounds.items() if k is None]
    lines.append(f"retrieval_complete: {str(not incomplete).lower()}")
    if incomplete:
        lines.append(f"incomplete_retrieval: {_nodes(incomplete)}")
    lines.append(f"max_error: {max(errors.values(), default=0.0)!r}")
    for k, i, v in trace.suspicion_events:
        lines.append(f"suspicion: round={k} node={i} suspects={v}")
    for i in cfg.graph.nodes:
        if i in trace.adversarial:
            lines.append(f"node={i} role=adversary final_x=- err=- retrieved_at=-")
        else:
            k = rounds[i]
            lines.append(
                f"node={i} role=regular final_x={trace.final_states[i].x!r} "
                f"err={errors[i]!r} retrieved_at={'never' if k is None else k}"
            )
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    try:
        cfg = load_scenario(args.scenario)
        trace = run(cfg)
    except ScenarioError as e:
        print(f"config error in {e}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(trace)
    (out / "trace.csv").write_text(trace.trace_csv(), encoding="utf-8")
    (out / "messages.csv").write_text(trace.messages_csv(), encoding="utf-8")
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_implications(args) -> int:
    counts = implication_frequencies(args.n, args.f, args.samples, random.Random(args.seed))
    for k, v in counts.items():
        print(f"{k}: {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="byzavg", description="Byzantine-resilient averaging toolkit")
    p.add_argument("--version", action="version", version=f"byzavg 0.1.0 ({kernels.BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario file")
    s.add_argument("scenario")
    s.add_argument("out_dir")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="robustness / resiliency verdict for a graph file")
    c.add_argument("graph", help="edge-list file, '-' for stdin")
    c.add_argument("--kind", required=True,
                   choices=["robust", "strong-robust", "strong-robust-wrt", "resilient"])
    c.add_argument("--r", type=int)
    c.add_argument("--f", type=int)
    c.add_argument("--set", help="node labels for strong-robust-wrt, e.g. 1,2")
    c.add_argument("--audit", action="store_true", help="full scan, compare counted and predicted tests")
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("connectivity", help="connectivity category and strong connectivity")
    k.add_argument("graph")
    k.add_argument("--paths", action="store_true", help="print the disjoint-path matrix")
    k.set_defaults(func=cmd_connectivity)

    f = sub.add_parser("search-fixture", help="find a graph meeting robustness constraints")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--r", type=int, required=True)
    f.add_argument("--must-contain-edge")
    f.add_argument("--break-on-removal", action="store_true")
    f.add_argument("--attack-node", type=int,
                   help="also require a liar at this node to block retrieval once the edge is gone")
    f.add_argument("--max-edges", type=int, help="undirected edge budget")
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_search)

    gn = sub.add_parser("gen", help="print a named graph family as an edge list")
    gn.add_argument("--family", required=True, choices=["complete", "wheel", "cycle", "path"])
    gn.add_argument("--n", type=int, required=True)
    gn.add_argument("--hub", type=int)
    gn.set_defaults(func=cmd_gen)

    im = sub.add_parser("implications", help="sample strong (2f+1)-robustness vs f-resiliency")
    im.add_argument("--n", type=int, required=True)
    im.add_argument("--f", type=int, default=1)
    im.add_argument("--samples", type=int, default=200)
    im.add_argument("--seed", type=int, default=0)
    im.set_defaults(func=cmd_implications)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Usage as e:
        print(f"byzavg {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
