"""Minimal sufficient reasons and minimal change sets for a risk category.

Both explainers are greedy passes over the features whose guarantees come
from entailment checks, not heuristics:

* ``abduce`` starts from the fully fixed profile and drops every feature
  whose removal keeps the original category entailed. The survivors are
  sufficient and 1-minimal by construction.
* ``counterfact`` pins the immutable features, then tries to keep each
  mutable feature at its current value as long as the target category stays
  reachable. Whatever could not be kept is the change set; a witness
  assignment proves it works, and re-fixing any single changed feature
  makes the target unsatisfiable.

Outputs depend on the iteration order (any order yields a valid minimal
result); the declaration order of ``FeatureId`` is the default so repeated
runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import FEATURE_ORDER, FeatureId, PatientProfile, RiskCategory
from .engine import ALL_FEATURES, CategoryPredicate, LogicEngine, PartialInstance


class ExplainError(Exception):
    """Base class for explainer failures."""


class AlreadyAtTarget(ExplainError):
    """The profile's category already satisfies the requested target."""


class UnreachableTarget(ExplainError):
    """No assignment of the mutable features can reach the target."""


@dataclass(frozen=True)
class AbductiveExplanation:
    """Feature set whose reference values alone entail the category."""

    features: frozenset[FeatureId]
    category: RiskCategory
    order_used: tuple[FeatureId, ...]

    def sorted_features(self) -> tuple[FeatureId, ...]:
        return tuple(f for f in FEATURE_ORDER if f in self.features)


@dataclass(frozen=True)
class CounterfactualExplanation:
    """Mutable features to change, with a witness assignment that works."""

    changed: frozenset[FeatureId]
    target: CategoryPredicate
    witness: PatientProfile
    original_category: RiskCategory

    def sorted_changed(self) -> tuple[FeatureId, ...]:
        return tuple(f for f in FEATURE_ORDER if f in self.changed)


@dataclass(frozen=True)
class MutabilityPolicy:
    """Which features a counterfactual may change. Never sex or age."""

    mutable: frozenset[FeatureId]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mutable", frozenset(self.mutable))
        forbidden = self.mutable & {FeatureId.SEX, FeatureId.AGE}
        if forbidden:
            names = ", ".join(f.value for f in forbidden)
            raise ValueError(f"immutable features marked mutable: {names}")

    @property
    def immutable(self) -> frozenset[FeatureId]:
        return ALL_FEATURES - self.mutable


#: Default policy: lipids, blood pressure, treatment and smoking can change;
#: sex, age and (clinically irreversible) diabetes cannot.
DEFAULT_POLICY = MutabilityPolicy(
    frozenset(
        {
            FeatureId.HDL,
            FeatureId.TOTAL_CHOL,
            FeatureId.SBP,
            FeatureId.TREATMENT,
            FeatureId.SMOKER,
        }
    )
)

#: Looser policy that only protects sex and age.
AGE_SEX_ONLY_POLICY = MutabilityPolicy(DEFAULT_POLICY.mutable | {FeatureId.DIABETIC})


def default_target(category: RiskCategory) -> CategoryPredicate:
    """The immediately lower category as an equality target."""
    if category is RiskCategory.LOW:
        raise AlreadyAtTarget("no category below low")
    return CategoryPredicate.equals(RiskCategory(category - 1))


def abduce(
    engine: LogicEngine,
    profile: PatientProfile,
    order: Sequence[FeatureId] | None = None,
) -> AbductiveExplanation:
    """Subset-minimal sufficient reason for the profile's category.

    Deletion pass: every feature is tentatively unfixed in ``order`` and
    stays unfixed iff the remaining fixed set still entails the original
    category.

    Args:
        engine: entailment engine over the loaded schedules.
        profile: the full profile to explain.
        order: permutation of all eight features; defaults to declaration
            order.

    Returns:
        An explanation satisfying sufficiency and 1-minimality.
    """
    order = _check_order(order, ALL_FEATURES)
    category = engine.category_of(profile)
    pred = CategoryPredicate.equals(category)
    fixed = set(ALL_FEATURES)
    for feature in order:
        candidate = PartialInstance(profile, frozenset(fixed - {feature}))
        if engine.entails_category_fast(candidate, pred):
            fixed.discard(feature)
    return AbductiveExplanation(frozenset(fixed), category, order)


def counterfact(
    engine: LogicEngine,
    profile: PatientProfile,
    target: CategoryPredicate | None = None,
    policy: MutabilityPolicy = DEFAULT_POLICY,
    order: Sequence[FeatureId] | None = None,
) -> CounterfactualExplanation:
    """Subset-minimal change set that makes the target category reachable.

    Starting from only the immutable features fixed, each mutable feature is
    re-fixed at its current value iff the target stays satisfiable. The
    features that could not be kept form the change set.

    Raises:
        AlreadyAtTarget: the profile already satisfies the target.
        UnreachableTarget: the target is unsatisfiable even with every
            mutable feature free.
    """
    original = engine.category_of(profile)
    if target is None:
        target = default_target(original)  # raises AlreadyAtTarget at LOW
    if target.holds(original):
        raise AlreadyAtTarget(
            f"profile is already {original.label}; target {target.describe()} holds"
        )
    if not any(target.holds(c) for c in RiskCategory):
        raise AlreadyAtTarget(f"no category satisfies {target.describe()}")
    order = _check_order(order, policy.mutable)
    mutable_order = tuple(f for f in order if f in policy.mutable)

    kept = set(policy.immutable)
    if not engine.is_satisfiable(PartialInstance(profile, frozenset(kept)), target):
        raise UnreachableTarget(
            f"target {target.describe()} unreachable given immutable features"
        )
    for feature in mutable_order:
        trial = PartialInstance(profile, frozenset(kept | {feature}))
        if engine.is_satisfiable(trial, target):
            kept.add(feature)
    changed = policy.mutable - kept
    witness = engine.satisfiable(PartialInstance(profile, frozenset(kept)), target)
    assert witness is not None  # satisfiability was preserved at every step
    return CounterfactualExplanation(frozenset(changed), target, witness, original)


def _check_order(
    order: Sequence[FeatureId] | None, required: Iterable[FeatureId]
) -> tuple[FeatureId, ...]:
    if order is None:
        order = FEATURE_ORDER
    order = tuple(order)
    if len(set(order)) != len(order):
        raise ValueError("feature order contains duplicates")
    missing = set(required) - set(order)
    if missing:
        names = ", ".join(sorted(f.value for f in missing))
        raise ValueError(f"feature order does not cover: {names}")
    return order


# ---------------------------------------------------------------------------
# Invariant checks (used by the sweep and the test suite)
# ---------------------------------------------------------------------------

EntailsFn = Callable[[PartialInstance, CategoryPredicate], bool]


def verify_abductive(
    engine: LogicEngine,
    profile: PatientProfile,
    explanation: AbductiveExplanation,
    entails: EntailsFn | None = None,
) -> None:
    """Assert sufficiency and 1-minimality; raise ExplainError otherwise."""
    entails = entails or engine.entails_category_fast
    pred = CategoryPredicate.equals(explanation.category)
    fixed = explanation.features
    if not entails(PartialInstance(profile, fixed), pred):
        raise ExplainError(f"abductive set {_names(fixed)} is not sufficient for {profile}")
    for feature in fixed:
        if entails(PartialInstance(profile, fixed - {feature}), pred):
            raise ExplainError(
                f"abductive set {_names(fixed)} not minimal: {feature.value} is redundant"
            )


def verify_counterfactual(
    engine: LogicEngine,
    profile: PatientProfile,
    explanation: CounterfactualExplanation,
    policy: MutabilityPolicy = DEFAULT_POLICY,
) -> None:
    """Assert validity and necessity; raise ExplainError otherwise."""
    changed = explanation.changed
    if not changed <= policy.mutable:
        raise ExplainError(f"change set {_names(changed)} leaves the mutable set")
    witness = explanation.witness
    for feature in ALL_FEATURES - changed:
        if witness.value(feature) != profile.value(feature):
            raise ExplainError(
                f"witness differs on unchanged feature {feature.value}"
            )
    if not explanation.target.holds(engine.category_of(witness)):
        raise ExplainError("witness does not reach the target category")
    for feature in changed:
        refixed = ALL_FEATURES - changed | {feature}
        if engine.is_satisfiable(
            PartialInstance(profile, frozenset(refixed)), explanation.target
        ):
            raise ExplainError(
                f"change set {_names(changed)} not minimal: {feature.value} "
                "need not change"
            )


def _names(features: Iterable[FeatureId]) -> str:
    return "{" + ", ".join(f.value for f in FEATURE_ORDER if f in set(features)) + "}"
