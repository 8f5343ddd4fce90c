"""Deterministic team-sprint consensus simulator with table reporting."""

from .core import (
    DEFAULT_MASTER_SEED,
    ConfigurationError,
    PerformanceProfile,
    RoundOutcome,
    RunResult,
    ScenarioConfig,
    TeamAssignment,
    draw_performance_profile,
    execute_round,
    form_teams,
    member_work_time,
    run_simulation,
    simulated_time,
)
from .experiments import (
    Condition,
    ScenarioSummary,
    SweepSpec,
    derive_run_seed,
    execute_runs,
    execute_scenario,
    summarize_runs,
    sweep_team_sizes,
)
from .metrics import (
    DistStats,
    RankingHistogram,
    ShapeStats,
    aggregate_stats_over_runs,
    competition_rank,
    distribution_stats,
    excess_kurtosis,
    pearson_correlation,
    ranking_histogram,
    skewness,
)
from .reporting import (
    emit_reward_histogram,
    emit_table,
    scenario_label,
    write_participant_csv,
)

__all__ = [
    "DEFAULT_MASTER_SEED",
    "ConfigurationError",
    "Condition",
    "DistStats",
    "PerformanceProfile",
    "RankingHistogram",
    "RoundOutcome",
    "RunResult",
    "ScenarioConfig",
    "ScenarioSummary",
    "ShapeStats",
    "SweepSpec",
    "TeamAssignment",
    "aggregate_stats_over_runs",
    "competition_rank",
    "derive_run_seed",
    "distribution_stats",
    "draw_performance_profile",
    "emit_reward_histogram",
    "emit_table",
    "excess_kurtosis",
    "execute_round",
    "execute_runs",
    "execute_scenario",
    "form_teams",
    "member_work_time",
    "pearson_correlation",
    "ranking_histogram",
    "run_simulation",
    "scenario_label",
    "simulated_time",
    "skewness",
    "summarize_runs",
    "sweep_team_sizes",
    "write_participant_csv",
]
