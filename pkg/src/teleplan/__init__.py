"""Multi-objective base-station site selection.

Sequential subset selection from a candidate pool, trained with
group-relative policy optimization under a staged reward curriculum and a
KL anchor to a behavior-cloned reference policy, with PPO and single-stage
ablation baselines, a sectorized RSRP coverage simulator, and evaluation
tooling.
"""

from .coverage import (
    GridConfig,
    RadioConfig,
    RsrpGrid,
    antenna_gain,
    coverage_stats,
    pathloss,
    rsrp_grid,
)
from .evaluation import (
    ComparisonReport,
    compare_runs,
    export_geojson,
    overlap,
    plan_greedy,
    plan_kmeans,
)
from .policy import (
    PolicyParams,
    StateBuilder,
    Trajectory,
    forward,
    greedy_decode,
    init_policy,
    load_params,
    log_prob_and_grad,
    rollout,
    sample_action,
    save_params,
)
from .rewards import (
    MockSemanticScorer,
    RemoteSemanticScorer,
    RewardBreakdown,
    RewardWeights,
    cluster_score,
    combined_reward,
    evaluate_selection,
    mock_complaint_score,
    mock_semantic_score,
    set_terms,
    stage_reward,
)
from .scenario import (
    CandidateSite,
    NormalizedScenario,
    Scenario,
    generate_scenario,
    load_scenario,
    normalize_features,
    save_scenario,
    validate_scenario,
)
from .training import (
    TrainConfig,
    TrainHistory,
    clip_ratio,
    group_advantages,
    grpo_step,
    kl_categorical,
    sft_pretrain,
    stage_scheduler,
    train_grpo,
    train_ppo,
    train_vanilla_grpo,
)

__version__ = "0.1.0"
