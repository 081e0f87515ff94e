"""Mixed graphical models: specification, compatibility, sampling, and recovery.

A pairwise Markov random field whose node-conditional distributions may be
Gaussian, Bernoulli, Poisson, or exponential.  The package covers the full
pipeline: model specification, compatibility checking, Gibbs-sampler data
generation, l1-penalized neighbourhood selection with BIC tuning, type-aware
edge-set reconstruction, and a simulation harness.
"""

from .combine import (
    BoundEstimates,
    EdgeSet,
    combine_and,
    combine_or,
    combine_with_selection_rules,
    estimate_bounds,
    preferred_node,
    select_edge_estimate,
    true_bounds,
)
from .compat import CompatReport, RuleViolation, Verdict, check_compatibility, joint_unnormalized_logdensity
from .core import (
    Dataset,
    DomainError,
    EdgeMatrix,
    ModelSpec,
    NodeParams,
    NodeType,
    conditional_loglik,
    conditional_loglik_gradient,
    conditional_neg_hessian,
    log_partition,
    log_partition_derivs,
    natural_parameter,
)
from .fit import (
    FitConfig,
    NeighborhoodFit,
    PathFit,
    bic,
    estimated_neighborhood,
    fit_node,
    fit_node_path,
    fit_path,
    kkt_residual,
    lambda_grid_for,
    lambda_max,
    penalty_weights,
    select_lambda_by_type,
)
from .gibbs import KERNEL, GibbsConfig, run_chain, sample_conditional
from .harness import (
    ExperimentConfig,
    RecoveryRecord,
    irrepresentability_diagnostic,
    job_seed,
    make_config,
    run_bic_point,
    run_edge_count_comparison,
    run_experiment,
    run_recovery_curve,
)
from .simgen import (
    GenerationError,
    SimGraphConfig,
    chain_cross_edge_set,
    draw_edge_potentials,
    generate_model,
    repair_gaussian_block,
    repair_poisson_edges,
)

__version__ = "0.1.0"
