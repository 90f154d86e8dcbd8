"""commfit: interpretable overlapping-community graph models.

Fits the edge-independent model sigmoid(V diag(w) V^T) to undirected graphs:
nonnegative memberships V in [0,1]^{n x k} and one signed weight per
community, so positive weights mark homophilous communities and negative
weights heterophilous ones. Fitting runs in three stages: an unconstrained
logistic factorization, an exact conversion to nonnegative factors, and a
pruned, bound-constrained fine-tune.
"""

from .constrained import (
    CommunityModel,
    build_threshold_witness,
    constrained_objective,
    fit_constrained,
    logit_contributions,
    predict_prob,
    prune_columns,
    scale_weights,
    to_vw,
)
from .evaluate import (
    HoldoutSplit,
    LinkPredictionReport,
    ReconReport,
    binarize_memberships,
    community_f1,
    link_prediction_experiment,
    make_holdout,
    random_baseline_f1,
    recon_report,
    reconstruction_sweep,
    svd_baseline,
)
from .graphs import (
    CommunityLabels,
    Graph,
    RecruiterParams,
    RecruiterSample,
    adjacency_dense,
    generate_recruiter_graph,
    generate_threshold_graph,
    load_communities,
    load_dataset,
    load_edge_list,
    max_degree,
    sample_recruiter,
    save_communities,
    save_edge_list,
)
from .linalg import (
    EigenDecomposition,
    JacobiConvergenceError,
    bce_with_logits,
    low_rank_sym_eigen,
    sigmoid,
    sym_eigen,
    thin_qr,
)
from .lpca import LpcaFactors, fit_lpca, lpca_objective
from .nninit import NonnegFactors, init_constrained, relu_split_columns
from .optim import FitConfig, OptimResult, minimize
from .pipeline import PipelineError, PipelineResult, fit_pipeline
from .serialize import community_report, load_factors, save_factors

__version__ = "0.1.0"

__all__ = [
    "CommunityModel",
    "CommunityLabels",
    "EigenDecomposition",
    "FitConfig",
    "Graph",
    "HoldoutSplit",
    "JacobiConvergenceError",
    "LinkPredictionReport",
    "LpcaFactors",
    "NonnegFactors",
    "OptimResult",
    "PipelineError",
    "PipelineResult",
    "ReconReport",
    "RecruiterParams",
    "RecruiterSample",
    "adjacency_dense",
    "bce_with_logits",
    "binarize_memberships",
    "build_threshold_witness",
    "community_f1",
    "community_report",
    "constrained_objective",
    "fit_constrained",
    "fit_lpca",
    "fit_pipeline",
    "generate_recruiter_graph",
    "generate_threshold_graph",
    "init_constrained",
    "link_prediction_experiment",
    "load_communities",
    "load_dataset",
    "load_edge_list",
    "load_factors",
    "logit_contributions",
    "low_rank_sym_eigen",
    "lpca_objective",
    "make_holdout",
    "max_degree",
    "minimize",
    "predict_prob",
    "prune_columns",
    "random_baseline_f1",
    "recon_report",
    "reconstruction_sweep",
    "relu_split_columns",
    "sample_recruiter",
    "save_communities",
    "save_edge_list",
    "save_factors",
    "scale_weights",
    "sigmoid",
    "svd_baseline",
    "sym_eigen",
    "thin_qr",
    "to_vw",
]
