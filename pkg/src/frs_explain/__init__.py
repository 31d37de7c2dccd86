"""Explainable cardiovascular risk scoring over finite-domain point tables.

Scores profiles against data-driven per-sex point tables, decides category
entailment/satisfiability over partial instances exactly, and derives
minimal abductive and counterfactual explanations with correctness
guaranteed by entailment checks.
"""

from .core import (
    Bin,
    DomainError,
    FEATURE_ORDER,
    FeatureId,
    PatientProfile,
    PerSexSchedule,
    RiskCategory,
    RiskPercent,
    ScheduleError,
    ScheduleSet,
    ScoreBreakdown,
    Sex,
    assess,
    categorize,
    feature_points,
    load_default_schedules,
    load_schedule_dir,
    load_schedules,
    parse_schedule,
    risk_percent,
    total_points,
)
from .engine import (
    CategoryPredicate,
    FeatureDomain,
    LogicEngine,
    PartialInstance,
)
from .explain import (
    AGE_SEX_ONLY_POLICY,
    AbductiveExplanation,
    AlreadyAtTarget,
    CounterfactualExplanation,
    DEFAULT_POLICY,
    MutabilityPolicy,
    UnreachableTarget,
    abduce,
    counterfact,
    default_target,
)
from .sweep import (
    GridSpec,
    InstanceRecord,
    SweepReport,
    aggregate,
    generate_grid,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AGE_SEX_ONLY_POLICY",
    "AbductiveExplanation",
    "AlreadyAtTarget",
    "Bin",
    "CategoryPredicate",
    "CounterfactualExplanation",
    "DEFAULT_POLICY",
    "DomainError",
    "FEATURE_ORDER",
    "FeatureDomain",
    "FeatureId",
    "GridSpec",
    "InstanceRecord",
    "LogicEngine",
    "MutabilityPolicy",
    "PartialInstance",
    "PatientProfile",
    "PerSexSchedule",
    "RiskCategory",
    "RiskPercent",
    "ScheduleError",
    "ScheduleSet",
    "ScoreBreakdown",
    "Sex",
    "SweepReport",
    "UnreachableTarget",
    "abduce",
    "aggregate",
    "assess",
    "categorize",
    "counterfact",
    "default_target",
    "feature_points",
    "generate_grid",
    "load_default_schedules",
    "load_schedule_dir",
    "load_schedules",
    "parse_schedule",
    "risk_percent",
    "sweep",
    "total_points",
]
