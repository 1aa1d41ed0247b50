"""Byzantine-resilient distributed averaging: retrieval protocol simulator
and graph robustness analysis."""
from .digraph import (
    Digraph,
    GraphError,
    complete,
    cycle_bidirectional,
    fig3_graph,
    parse_edge_list,
    remove_edge,
    serialize_edge_list,
    wheel,
)
from .kernels import BACKEND
from .robustness import (
    ConnectivityCategory,
    connectivity_category,
    disjoint_paths,
    is_f_resilient,
    is_r_reachable,
    is_r_robust,
    is_strongly_r_robust,
    is_strongly_r_robust_wrt,
    strong_connectivity,
)
from .scenario import load_scenario
from .simulator import ScenarioConfig, consensus_error, retrieval_rounds, run, run_async, run_sync

__version__ = "0.1.0"
