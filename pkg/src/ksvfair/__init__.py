"""Budget-restricted Shapley values and merit-proportional combinatorial bandits."""

from .games import (
    AxiomReport,
    CoalitionSizeError,
    RestrictedGame,
    ShapleyVector,
    additive_game,
    carrier_exact_values,
    carrier_game,
    check_linearity,
    classical_shapley,
    coverage_game,
    exact_k_shapley,
    marginal_contribution,
    mix_games,
    sampled_k_shapley,
    table_game,
    verify_axioms,
)
from .envs import (
    CascadeEnv,
    GameOracle,
    Graph,
    SyntheticEnv,
    ValuationOracle,
    cascade_exact,
    load_edge_list,
)
from .estimation import RoundEstimates, muras_round, running_mean_update, shapley_estimation
from .rounding import MarginalVector, normalize_to_marginals, rrs_sample
from .policies import (
    PolicyConfig,
    PolicyState,
    RunRecord,
    confidence_radius,
    etcg_baseline,
    ksvfair_round,
    muras_run,
    run_ksvfair,
    uniform_baseline,
)
from .metrics import (
    FairnessLedger,
    fair_policy,
    fairness_regret_step,
    merit_to_selection,
    regret_slope,
)

__all__ = [
    "AxiomReport",
    "CascadeEnv",
    "CoalitionSizeError",
    "FairnessLedger",
    "GameOracle",
    "Graph",
    "MarginalVector",
    "PolicyConfig",
    "PolicyState",
    "RestrictedGame",
    "RoundEstimates",
    "RunRecord",
    "ShapleyVector",
    "SyntheticEnv",
    "ValuationOracle",
    "additive_game",
    "carrier_exact_values",
    "carrier_game",
    "cascade_exact",
    "check_linearity",
    "classical_shapley",
    "confidence_radius",
    "coverage_game",
    "etcg_baseline",
    "exact_k_shapley",
    "fair_policy",
    "fairness_regret_step",
    "ksvfair_round",
    "load_edge_list",
    "marginal_contribution",
    "merit_to_selection",
    "mix_games",
    "muras_round",
    "muras_run",
    "normalize_to_marginals",
    "regret_slope",
    "rrs_sample",
    "run_ksvfair",
    "running_mean_update",
    "sampled_k_shapley",
    "shapley_estimation",
    "table_game",
    "uniform_baseline",
    "verify_axioms",
]
