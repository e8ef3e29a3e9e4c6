"""Graph-regularized NMF with a row-sparsity budget.

Factorizes a nonnegative data matrix as ``x ~ w @ h`` where ``h`` is
pulled along a sample-affinity graph and ``w`` may keep at most ``k``
nonzero rows (feature selection).  Solved by alternating proximal
linearized steps, optionally accelerated with adaptive momentum.

Typical use::

    from sparsegnmf import (ProblemSpec, SolverConfig, build_knn_graph, solve)

    graph = build_knn_graph(x, neighbors=5)
    problem = ProblemSpec(x=x, rank=3, sparsity_k=17, lam=1.0, graph=graph)
    w, h, trace = solve(problem, SolverConfig(algorithm="acc_palm", seed=0))
"""

from .datagen import BlockAdjacencySpec, SyntheticSpec, generate_block_adjacency, generate_synthetic
from .experiment import (
    ConfigError,
    ExperimentConfig,
    RunRecord,
    load_experiment_config,
    run_experiment,
)
from .graph import GraphModel, WeightScheme, build_knn_graph, from_adjacency, laplacian_quadratic
from .linalg import as_matrix, frobenius_norm, spectral_norm
from .matrixio import load_csv_matrix, load_labels, save_csv_matrix, save_labels
from .metrics import ClusteringResult, MetricReport, acc, kmeans, nmi, relative_error
from .objective import ProblemSpec, grad_h, grad_w, lipschitz_h, lipschitz_w, smooth_objective
from .prox import RowSelection, project_nonneg, project_row_sparse
from .solvers import (
    ConvergenceTrace,
    NonFiniteError,
    SolverConfig,
    SolverState,
    TraceRecord,
    init_factors,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "BlockAdjacencySpec",
    "ClusteringResult",
    "ConfigError",
    "ConvergenceTrace",
    "ExperimentConfig",
    "GraphModel",
    "MetricReport",
    "NonFiniteError",
    "ProblemSpec",
    "RowSelection",
    "RunRecord",
    "SolverConfig",
    "SolverState",
    "SyntheticSpec",
    "TraceRecord",
    "WeightScheme",
    "acc",
    "as_matrix",
    "build_knn_graph",
    "frobenius_norm",
    "from_adjacency",
    "generate_block_adjacency",
    "generate_synthetic",
    "grad_h",
    "grad_w",
    "init_factors",
    "kmeans",
    "laplacian_quadratic",
    "lipschitz_h",
    "lipschitz_w",
    "load_csv_matrix",
    "load_experiment_config",
    "load_labels",
    "nmi",
    "project_nonneg",
    "project_row_sparse",
    "relative_error",
    "run_experiment",
    "save_csv_matrix",
    "save_labels",
    "smooth_objective",
    "solve",
    "spectral_norm",
]
