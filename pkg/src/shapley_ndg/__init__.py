"""Weighted Shapley network design games with affine costs: model, dynamics,
exhaustive oracles and smoothed-analysis tooling."""
from .dynamics import (
    BoundReport,
    DeviationStep,
    TrajectoryLog,
    best_response,
    empirical_alpha,
    epsilon_abrd,
    initial_profile,
    is_improving,
    iteration_bound,
    verify_apne,
)
from .errors import (
    BoundsNotApplicableError,
    DomainError,
    GameError,
    InstanceError,
    NoPathError,
    NormalizationWarning,
    OracleDisagreementError,
    ProfileError,
    SpecError,
    TooLargeError,
    ValidationError,
)
from .game import (
    Edge,
    Instance,
    LoadMap,
    Player,
    Profile,
    alpha_bound,
    compute_loads,
    cost_share,
    edge_cost,
    player_cost,
    potential,
    potential_bounds,
    social_cost,
    validate_instance,
)
from .oracle import (
    OracleReport,
    PathCatalog,
    cross_check_best_response,
    enumerate_profiles,
    enumerate_simple_paths,
    exact_min_alpha,
    path_catalog,
)
from .smoothed import (
    DistributionSpec,
    McReport,
    TopologySpec,
    gen_instance,
    lemma2_mc,
    sample_phi_smooth,
    uniform_sum_cdf,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "BoundsNotApplicableError",
    "DeviationStep",
    "DistributionSpec",
    "DomainError",
    "Edge",
    "GameError",
    "Instance",
    "InstanceError",
    "LoadMap",
    "McReport",
    "NoPathError",
    "NormalizationWarning",
    "OracleDisagreementError",
    "OracleReport",
    "PathCatalog",
    "Player",
    "Profile",
    "ProfileError",
    "SpecError",
    "TooLargeError",
    "TopologySpec",
    "TrajectoryLog",
    "ValidationError",
    "alpha_bound",
    "best_response",
    "compute_loads",
    "cost_share",
    "cross_check_best_response",
    "edge_cost",
    "empirical_alpha",
    "enumerate_profiles",
    "enumerate_simple_paths",
    "epsilon_abrd",
    "exact_min_alpha",
    "gen_instance",
    "initial_profile",
    "is_improving",
    "iteration_bound",
    "lemma2_mc",
    "path_catalog",
    "player_cost",
    "potential",
    "potential_bounds",
    "sample_phi_smooth",
    "social_cost",
    "uniform_sum_cdf",
    "validate_instance",
    "verify_apne",
]
