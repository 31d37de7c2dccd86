"""One shared result payload for the CLI's --json output and the HTTP API.

Both surfaces must answer identically for identical profiles, so they call
the same builder here. Risk percent extremes serialize as the tag strings
"lt1"/"gt30" rather than fake numbers.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .core import (
    FEATURE_ORDER,
    FeatureId,
    PatientProfile,
    RiskCategory,
    assess,
)
from .engine import CategoryPredicate, LogicEngine
from .explain import (
    DEFAULT_POLICY,
    AlreadyAtTarget,
    MutabilityPolicy,
    UnreachableTarget,
    abduce,
    counterfact,
    default_target,
)


def profile_payload(profile: PatientProfile) -> dict:
    return {
        "sex": profile.sex.value,
        "age": profile.age,
        "hdl": profile.hdl,
        "total_chol": profile.total_chol,
        "sbp": profile.sbp,
        "treated_sbp": profile.treated_sbp,
        "smoker": profile.smoker,
        "diabetic": profile.diabetic,
    }


def feature_names(features) -> list[str]:
    members = set(features)
    return [f.value for f in FEATURE_ORDER if f in members]


def counterfactual_payload(
    engine: LogicEngine,
    profile: PatientProfile,
    target: CategoryPredicate | None = None,
    policy: MutabilityPolicy = DEFAULT_POLICY,
    order: Sequence[FeatureId] | None = None,
) -> dict:
    """Counterfactual block: change set + witness, or a status marker."""
    try:
        cf = counterfact(engine, profile, target, policy, tuple(order) if order else None)
    except AlreadyAtTarget as exc:
        return {"status": "already_at_target", "detail": str(exc)}
    except UnreachableTarget as exc:
        return {"status": "unreachable", "detail": str(exc)}
    changes = {
        f.value: {"from": _jsonable(profile.value(f)), "to": _jsonable(cf.witness.value(f))}
        for f in cf.sorted_changed()
    }
    return {
        "status": "ok",
        "target": cf.target.describe(),
        "changed": feature_names(cf.changed),
        "changes": changes,
        "witness": profile_payload(cf.witness),
    }


def assessment_payload(
    engine: LogicEngine,
    profile: PatientProfile,
    order: Sequence[FeatureId] | None = None,
    policy: MutabilityPolicy = DEFAULT_POLICY,
    target: CategoryPredicate | None = None,
) -> dict:
    """Full scoring + explanation payload for one profile."""
    breakdown, rp, category = assess(engine.schedules, profile)
    order_t = tuple(order) if order else None
    abduction = abduce(engine, profile, order_t)
    payload = {
        "profile": profile_payload(profile),
        "breakdown": breakdown.as_dict(),
        "risk_percent": rp.json_value(),
        "risk_percent_display": str(rp),
        "category": category.label,
        "abductive": feature_names(abduction.features),
        "counterfactual": counterfactual_payload(engine, profile, target, policy, order_t),
    }
    return payload


def _jsonable(value):
    from .core import Sex

    if isinstance(value, Sex):
        return value.value
    return value
