"""Entailment, satisfiability and the fast-engine equivalence guarantees."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_satisfiable, random_partial, random_profile
from frs_explain.core import (
    FeatureId,
    PatientProfile,
    PerSexSchedule,
    RiskCategory,
    RiskPercent,
    ScheduleError,
    ScheduleSet,
    Sex,
    assess,
    total_points,
)
from frs_explain.engine import (
    ALL_FEATURES,
    CategoryPredicate,
    FeatureDomain,
    LogicEngine,
    PartialInstance,
)

EQ = CategoryPredicate.equals
HIGH = RiskCategory.HIGH
LOW = RiskCategory.LOW
MODERATE = RiskCategory.MODERATE


def predicates():
    preds = []
    for cat in RiskCategory:
        preds.append(CategoryPredicate.equals(cat))
        preds.append(CategoryPredicate.at_most(cat))
        preds.append(CategoryPredicate.strictly_below(cat))
    return preds


class TestDomains:
    def test_representative_counts_match_quantization(self, engine):
        male = engine.domains.for_sex(Sex.MALE)
        female = engine.domains.for_sex(Sex.FEMALE)
        assert (len(male.age), len(male.hdl), len(male.total_chol), len(male.sbp)) == (10, 5, 5, 5)
        assert (len(female.age), len(female.hdl), len(female.total_chol), len(female.sbp)) == (10, 5, 5, 6)

    def test_representatives_lie_in_distinct_bins(self, engine, schedules):
        for sex in Sex:
            per_sex = schedules.for_sex(sex)
            d = engine.domains.for_sex(sex)
            for bins, values in (
                (per_sex.age_bins, d.age),
                (per_sex.hdl_bins, d.hdl),
                (per_sex.total_chol_bins, d.total_chol),
                (per_sex.sbp_untreated_bins, d.sbp),
                (per_sex.sbp_treated_bins, d.sbp),
            ):
                owners = []
                for v in values:
                    owner = next(i for i, b in enumerate(bins) if b.contains(v))
                    owners.append(owner)
                assert len(set(owners)) == len(owners)

    def test_grid_sizes(self, engine):
        assert engine.domains.size(Sex.MALE) == 10_000
        assert engine.domains.size(Sex.FEMALE) == 12_000


class TestCompletions:
    def test_all_fixed_yields_reference(self, engine, worked_example):
        p = PartialInstance(worked_example, ALL_FEATURES)
        assert list(engine.completions(p)) == [worked_example]

    def test_two_free_booleans_yield_four(self, engine, worked_example):
        fixed = ALL_FEATURES - {FeatureId.SMOKER, FeatureId.DIABETIC}
        profiles = list(engine.completions(PartialInstance(worked_example, fixed)))
        assert len(profiles) == 4
        assert len(set(profiles)) == 4

    def test_all_free_yields_full_grid(self, engine, worked_example):
        p = PartialInstance(worked_example, frozenset())
        profiles = list(engine.completions(p))
        assert len(profiles) == 22_000
        assert len(set(profiles)) == 22_000

    def test_sbp_domain_follows_each_sex(self, engine, worked_example):
        p = PartialInstance(worked_example, ALL_FEATURES - {FeatureId.SEX, FeatureId.SBP})
        by_sex = {}
        for profile in engine.completions(p):
            by_sex.setdefault(profile.sex, set()).add(profile.sbp)
        assert len(by_sex[Sex.MALE]) == 5
        assert len(by_sex[Sex.FEMALE]) == 6


class TestEntailsOracle:
    def test_worked_example_fully_fixed_is_high(self, engine, worked_example):
        p = PartialInstance(worked_example, ALL_FEATURES)
        assert engine.entails_category(p, EQ(HIGH))

    def test_everything_free_is_not_all_high(self, engine, worked_example):
        p = PartialInstance(worked_example, frozenset())
        assert not engine.entails_category(p, EQ(HIGH))

    def test_male_70_sbp170_diabetic_entails_high(self, engine, worked_example):
        fixed = frozenset({FeatureId.SEX, FeatureId.AGE, FeatureId.SBP, FeatureId.DIABETIC})
        assert engine.entails_category(PartialInstance(worked_example, fixed), EQ(HIGH))


class TestEntailsFast:
    def test_male_70_sbp170_entails_high(self, engine, worked_example):
        fixed = frozenset({FeatureId.SEX, FeatureId.AGE, FeatureId.SBP})
        p = PartialInstance(worked_example, fixed)
        assert engine.entails_category_fast(p, EQ(HIGH))
        assert engine.entails_category(p, EQ(HIGH))  # oracle agrees

    def test_fully_fixed_entails_own_category(self, engine, worked_example):
        cat = engine.category_of(worked_example)
        p = PartialInstance(worked_example, ALL_FEATURES)
        assert engine.entails_category_fast(p, EQ(cat))

    def test_refuses_negated_predicates(self, engine, worked_example):
        p = PartialInstance(worked_example, ALL_FEATURES)
        with pytest.raises(ValueError):
            engine.entails_category_fast(p, EQ(HIGH).negate())

    def test_agrees_with_oracle_on_random_partials(self, engine):
        rng = random.Random(1404)
        preds = predicates()
        for _ in range(120):
            p = random_partial(rng, engine.domains)
            pred = rng.choice(preds)
            assert engine.entails_category_fast(p, pred) == engine.entails_category(p, pred), (
                p, pred)

    def test_agrees_with_oracle_exhaustively_up_to_three_free(self, engine, worked_example,
                                                              zero_point_male):
        refs = [
            worked_example,
            zero_point_male,
            PatientProfile(sex=Sex.FEMALE, age=62, hdl=38, total_chol=250, sbp=152,
                           treated_sbp=True, smoker=True, diabetic=False),
        ]
        preds = [EQ(HIGH), EQ(LOW), CategoryPredicate.at_most(MODERATE),
                 CategoryPredicate.strictly_below(HIGH)]
        features = list(FeatureId)
        for ref in refs:
            for k in range(4):
                for free in itertools.combinations(features, k):
                    p = PartialInstance(ref, ALL_FEATURES - set(free))
                    for pred in preds:
                        assert engine.entails_category_fast(p, pred) == \
                            engine.entails_category(p, pred), (ref, free, pred)


class TestSatisfiable:
    def test_male_75_diabetic_cannot_reach_low(self, engine):
        ref = PatientProfile(sex=Sex.MALE, age=75, hdl=50, total_chol=180, sbp=120,
                             diabetic=True)
        fixed = frozenset({FeatureId.SEX, FeatureId.AGE, FeatureId.DIABETIC})
        assert engine.satisfiable(PartialInstance(ref, fixed), EQ(LOW)) is None

    def test_fully_fixed_returns_reference(self, engine, worked_example):
        cat = engine.category_of(worked_example)
        p = PartialInstance(worked_example, ALL_FEATURES)
        assert engine.satisfiable(p, EQ(cat)) == worked_example

    def test_male_55_high_witness_is_canonical_first(self, engine):
        ref = PatientProfile(sex=Sex.MALE, age=55, hdl=45, total_chol=200, sbp=130)
        p = PartialInstance(ref, frozenset({FeatureId.SEX, FeatureId.AGE}))
        witness = engine.satisfiable(p, EQ(HIGH))
        # Frozen from the enumeration oracle: first High completion in
        # canonical order is hdl 34, tc 159, sbp 119 untreated, smoker,
        # diabetic (total 17 -> 29.4%).
        assert witness == PatientProfile(
            sex=Sex.MALE, age=55, hdl=34, total_chol=159, sbp=119,
            treated_sbp=False, smoker=True, diabetic=True,
        )
        assert witness == brute_satisfiable(engine, p, EQ(HIGH))
        assert total_points(engine.schedules, witness).total == 17

    def test_witness_matches_enumeration_on_random_partials(self, engine):
        rng = random.Random(77)
        preds = predicates() + [p.negate() for p in predicates()]
        for _ in range(60):
            p = random_partial(rng, engine.domains)
            pred = rng.choice(preds)
            assert engine.satisfiable(p, pred) == brute_satisfiable(engine, p, pred)

    def test_is_satisfiable_matches_witness_presence(self, engine):
        rng = random.Random(98)
        preds = predicates()
        for _ in range(200):
            p = random_partial(rng, engine.domains)
            pred = rng.choice(preds)
            assert engine.is_satisfiable(p, pred) == (engine.satisfiable(p, pred) is not None)


class TestDuality:
    def test_entails_iff_negation_unsatisfiable(self, engine):
        """Entailment and satisfiability are dual on 1,000 random partials."""
        rng = random.Random(2024)
        preds = predicates()
        for _ in range(1000):
            p = random_partial(rng, engine.domains)
            pred = rng.choice(preds)
            entailed = engine.entails_category_fast(p, pred)
            counterexample = engine.satisfiable(p, pred.negate())
            assert entailed == (counterexample is None), (p, pred)
            if counterexample is not None:
                cat = assess(engine.schedules, counterexample)[2]
                assert not pred.holds(cat)


class TestAntiMonotonicity:
    def test_entailment_survives_fixing_more(self, engine):
        rng = random.Random(31)
        preds = predicates()
        checked = 0
        while checked < 60:
            p = random_partial(rng, engine.domains)
            pred = rng.choice(preds)
            if not engine.entails_category_fast(p, pred):
                continue
            extra = frozenset(f for f in p.free if rng.random() < 0.5)
            superset = PartialInstance(p.reference, p.fixed | extra)
            assert engine.entails_category_fast(superset, pred)
            checked += 1


class TestRangeRepresentativeExactness:
    def test_two_probes_per_bin_score_identically(self, engine, schedules):
        """Any two values in one bin yield the same total, so representatives
        stand in exactly for their whole range."""
        for sex in Sex:
            per_sex = schedules.for_sex(sex)
            base = PatientProfile(sex=sex, age=50, hdl=50, total_chol=180, sbp=125)
            cases = [
                (FeatureId.AGE, per_sex.age_bins),
                (FeatureId.HDL, per_sex.hdl_bins),
                (FeatureId.TOTAL_CHOL, per_sex.total_chol_bins),
                (FeatureId.SBP, per_sex.sbp_untreated_bins),
                (FeatureId.SBP, per_sex.sbp_treated_bins),
            ]
            for feature, bins in cases:
                for b in bins:
                    rep = b.representative()
                    second = rep + 1 if b.contains(rep + 1) else rep - 1
                    assert b.contains(second) and second != rep
                    for treated in (False, True):
                        p1 = base.with_values({feature: rep, FeatureId.TREATMENT: treated})
                        p2 = base.with_values({feature: second, FeatureId.TREATMENT: treated})
                        assert total_points(schedules, p1) == total_points(schedules, p2), (
                            sex, feature, b)


class TestScheduleGuards:
    def test_engine_refuses_non_monotone_schedule(self, schedules):
        male = schedules.for_sex(Sex.MALE)
        rows = list(male.risk_rows)
        # Swap two percents so the table decreases once.
        rows[5], rows[6] = (rows[5][0], rows[6][1]), (rows[6][0], rows[5][1])
        broken = PerSexSchedule(
            sex=Sex.MALE,
            age_bins=male.age_bins,
            hdl_bins=male.hdl_bins,
            total_chol_bins=male.total_chol_bins,
            sbp_untreated_bins=male.sbp_untreated_bins,
            sbp_treated_bins=male.sbp_treated_bins,
            smoker_points=male.smoker_points,
            diabetic_points=male.diabetic_points,
            risk_rows=tuple(rows),
            low_max_percent=male.low_max_percent,
            high_min_percent=male.high_min_percent,
        )
        with pytest.raises(ScheduleError, match="non-decreasing"):
            LogicEngine(ScheduleSet({Sex.MALE: broken}))

    def test_sex_free_requires_both_schedules(self, schedules, worked_example):
        male_only = ScheduleSet({Sex.MALE: schedules.for_sex(Sex.MALE)})
        engine = LogicEngine(male_only)
        p = PartialInstance(worked_example, frozenset())
        with pytest.raises(ScheduleError, match="one schedule"):
            engine.entails_category_fast(p, EQ(HIGH))

    def test_partial_instance_rejects_unknown_features(self, worked_example):
        with pytest.raises(ValueError):
            PartialInstance(worked_example, frozenset({"age"}))


@given(data=st.data())
@settings(max_examples=150, deadline=None)
def test_fast_engine_equivalence_property(engine, data):
    """Hypothesis-driven spot check of fast-vs-oracle equivalence."""
    rng = random.Random(data.draw(st.integers(min_value=0, max_value=2**32 - 1)))
    p = random_partial(rng, engine.domains)
    pred = data.draw(st.sampled_from(predicates()))
    assert engine.entails_category_fast(p, pred) == engine.entails_category(p, pred)
