"""Nonlinear eigenfunctions of one-homogeneous functionals.

Gradient flows of absolutely one-homogeneous convex functionals reach
zero in finite time, and the normalized shape they assume on the way
out, the extinction profile, solves the nonlinear eigenproblem
``lambda p in partial J(p)``.  This package computes such profiles,
peels a signal into a sum of them, and applies the machinery to graph
clustering.
"""

from .data import (
    LabeledPointSet,
    cluster_from_function,
    clustering_accuracy,
    random_init,
    semi_supervised_init,
    three_moons,
    two_moons,
)
from .flow import (
    ExtinctionProfile,
    FlowStep,
    FlowTrace,
    extract_profile,
    high_rayleigh_subgradients,
    rayleigh,
    run_flow,
)
from .functional import (
    DomainMismatchError,
    Functional,
    GraphTotalVariation,
    MembershipReport,
    ProxConvergenceError,
    ProxResult,
    ProxSettings,
    Signal,
    TotalVariation1D,
    eval_graph_tv,
    eval_tv_1d,
    null_project,
    prox,
    prox_primal_dual,
    prox_tv_1d_exact,
    subgradient_membership,
)
from .graph import (
    DisconnectedGraphError,
    WeightedGraph,
    build_knn_graph,
    connected_components,
    fiedler_vector,
    grid_graph,
    laplacian_matrix,
    p_laplacian_apply,
)
from .scheme import (
    Atom,
    Decomposition,
    NormIdentityReport,
    SchemeFlowError,
    coefficient,
    parseval_report,
    reconstruct,
    run_scheme,
    verify_norm_identity,
)

__version__ = "0.1.0"
