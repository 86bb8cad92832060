"""Recovery of clustered graph signals and flow certificates for sampling sets."""

from .certify import (
    Certificate,
    FlowAssignment,
    certify_nnsp,
    empirical_nsp_check,
    flow_feasible,
    max_kappa,
    verify_flow,
)
from .graph import (
    WeightedGraph,
    build_graph,
    incidence_adjoint,
    incidence_apply,
    operator_norm_bound,
    tv,
    tv_restricted,
)
from .partition import (
    Partition,
    best_clustered_tv,
    boundary,
    chain_graph_experiment,
    clustered_signal,
    geodesic_partition,
    two_cluster_chain,
)
from .recovery import Observation, SolverConfig, SolverResult, check_theorem2_bound, mse, recover
from .sampling import boundary_adjacent, per_cluster, uniform_random

__version__ = "0.1.0"
