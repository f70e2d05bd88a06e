"""Myopic policy bounds and branch-and-bound planning for finite POMDPs
with belief-dependent (entropy-penalized) rewards."""

from .domains import (
    tracking_model_costed,
    tracking_model_small,
    tracking_observations,
    tracking_transitions,
)
from .filter import (
    ZeroLikelihoodError,
    as_belief,
    fosd_geq,
    mlr_geq,
    observation_likelihood,
    predict,
    sample_belief,
    sample_mlr_pair,
    sample_reachable,
    update,
)
from .mlr import (
    BoundCertificate,
    FeasibilityResult,
    LinearSystem,
    MissingCertificateError,
    NumericFailureError,
    action_interval,
    assemble_constraints_at,
    assemble_constraints_global,
    compute_certificate,
    k_matrix,
    load_certificate,
    myopic_lower,
    myopic_upper,
    save_certificate,
    solve_feasibility,
    transformed_reward,
)
from .model import (
    PomdpModel,
    RewardSpec,
    UncertaintyKind,
    ValidationReport,
    load_model,
    save_model,
    validate,
)
from .planner import (
    GapStats,
    PruningStats,
    SearchResult,
    bound_gap_experiment,
    branch_and_bound,
    expectimax,
    full_tree_size,
    prunable_tree_size,
    pruning_experiment,
)
from .rewards import (
    BeliefOutsideEpsilonSimplexError,
    expected_reward,
    information_gain,
    reward_gradient,
    uncertainty,
    uncertainty_gradient,
)
from .structure import (
    FilterMonotonicityReport,
    StructureReport,
    check_a1,
    check_a2_relaxed,
    check_a2_sampled,
    check_a3,
    check_all,
    is_tp2,
    validate_filter_monotonicity,
)

__version__ = "0.1.0"
