"""Entailment and satisfiability over partial instances of the model.

The score is constant within each table range, so one representative value
per range stands in exactly for the whole range. That quantization makes the
assignment space finite (22,000 profiles for the shipped tables) and lets
category statements be decided exactly without a general-purpose solver:

* ``entails_category`` enumerates completions and scores each one through
  the ordinary scoring path - the slow, trivially-correct oracle.
* ``entails_category_fast`` bounds the achievable total per sex (features
  are independent except the SBP/treatment pair, which is bounded jointly)
  and uses monotonicity of the risk table to decide the same question.
* ``satisfiable`` finds the first witness in canonical enumeration order,
  pruning with exact achievable-total sets instead of enumerating.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Mapping
from types import MappingProxyType

from .core import (
    FEATURE_ORDER,
    Bin,
    DomainError,
    FeatureId,
    PatientProfile,
    PerSexSchedule,
    RiskCategory,
    ScheduleError,
    ScheduleSet,
    Sex,
    assess,
)

ALL_FEATURES: frozenset[FeatureId] = frozenset(FeatureId)

_BIT: Mapping[FeatureId, int] = MappingProxyType(
    {f: 1 << i for i, f in enumerate(FEATURE_ORDER)}
)


@dataclass(frozen=True)
class PartialInstance:
    """A reference profile with a subset of features pinned to its values.

    The remaining (free) features range over their representative domains.
    """

    reference: PatientProfile
    fixed: frozenset[FeatureId]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fixed", frozenset(self.fixed))
        bad = self.fixed - ALL_FEATURES
        if bad:
            raise ValueError(f"unknown features in fixed set: {bad}")

    @property
    def free(self) -> frozenset[FeatureId]:
        return ALL_FEATURES - self.fixed

    def fix(self, feature: FeatureId) -> "PartialInstance":
        return PartialInstance(self.reference, self.fixed | {feature})

    def unfix(self, feature: FeatureId) -> "PartialInstance":
        return PartialInstance(self.reference, self.fixed - {feature})


@dataclass(frozen=True)
class CategoryPredicate:
    """A statement about a risk category, closed under negation."""

    kind: str  # "equals" | "at_most" | "strictly_below"
    category: RiskCategory
    negated: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("equals", "at_most", "strictly_below"):
            raise ValueError(f"unknown predicate kind {self.kind!r}")

    @classmethod
    def equals(cls, category: RiskCategory) -> "CategoryPredicate":
        return cls("equals", category)

    @classmethod
    def at_most(cls, category: RiskCategory) -> "CategoryPredicate":
        return cls("at_most", category)

    @classmethod
    def strictly_below(cls, category: RiskCategory) -> "CategoryPredicate":
        return cls("strictly_below", category)

    def holds(self, category: RiskCategory) -> bool:
        if self.kind == "equals":
            result = category is self.category
        elif self.kind == "at_most":
            result = category <= self.category
        else:
            result = category < self.category
        return not result if self.negated else result

    def negate(self) -> "CategoryPredicate":
        return replace(self, negated=not self.negated)

    def describe(self) -> str:
        text = {
            "equals": f"category = {self.category.label}",
            "at_most": f"category <= {self.category.label}",
            "strictly_below": f"category < {self.category.label}",
        }[self.kind]
        return f"not ({text})" if self.negated else text


@dataclass(frozen=True)
class SexDomain:
    """Representative values for one sex's numeric features."""

    age: tuple[int, ...]
    hdl: tuple[int, ...]
    total_chol: tuple[int, ...]
    sbp: tuple[int, ...]


@dataclass(frozen=True)
class FeatureDomain:
    """Per-sex representative values; booleans and sex are implicit."""

    by_sex: Mapping[Sex, SexDomain]

    def __post_init__(self) -> None:
        object.__setattr__(self, "by_sex", MappingProxyType(dict(self.by_sex)))

    @classmethod
    def from_schedules(cls, schedules: ScheduleSet) -> "FeatureDomain":
        by_sex = {}
        for sex in schedules.sexes:
            per_sex = schedules.for_sex(sex)
            by_sex[sex] = SexDomain(
                age=_representatives(per_sex.age_bins),
                hdl=_representatives(per_sex.hdl_bins),
                total_chol=_representatives(per_sex.total_chol_bins),
                sbp=_sbp_representatives(per_sex),
            )
        return cls(by_sex)

    def for_sex(self, sex: Sex) -> SexDomain:
        try:
            return self.by_sex[sex]
        except KeyError:
            raise ScheduleError(f"no domain for sex {sex.value!r}") from None

    def size(self, sex: Sex) -> int:
        d = self.for_sex(sex)
        return len(d.age) * len(d.hdl) * len(d.total_chol) * len(d.sbp) * 2 * 2 * 2


def _representatives(bins: tuple[Bin, ...]) -> tuple[int, ...]:
    reps = tuple(sorted(b.representative() for b in bins))
    for rep in reps:
        if not any(b.contains(rep) for b in bins):
            raise ScheduleError(f"representative {rep} outside every bin")
    if len(set(reps)) != len(reps):
        raise ScheduleError(f"duplicate representatives {reps}")
    return reps


def _sbp_representatives(per_sex: PerSexSchedule) -> tuple[int, ...]:
    """Representatives of the coarsest partition refining both SBP columns.

    Treated and untreated bins share boundaries in the shipped tables, but a
    custom schedule may split them differently; the refinement keeps the
    (untreated, treated) point pair constant within each representative's
    range.
    """
    unt, trt = per_sex.sbp_untreated_bins, per_sex.sbp_treated_bins
    if unt[0].min != trt[0].min or unt[-1].max != trt[-1].max:
        raise ScheduleError(
            f"{per_sex.sex.value}: treated and untreated SBP tables cover different spans"
        )
    span_lo, span_hi = unt[0].min, unt[-1].max
    cuts = sorted(
        {b.min for b in unt + trt if b.min is not None}
        | {b.max for b in unt + trt if b.max is not None}
    )
    if not cuts:
        raise ScheduleError(f"{per_sex.sex.value}: SBP tables define no ranges")
    reps = []
    if span_lo is None:
        reps.append(cuts[0] - 1)  # inside the shared open-below range
    reps.extend(c for c in cuts if c != span_hi)  # each range start
    return tuple(reps)


class _SexTables:
    """Precomputed point vectors, bounds and category masks for one sex."""

    __slots__ = (
        "sex", "schedule", "age_values", "age_pts", "hdl_values", "hdl_pts",
        "tc_values", "tc_pts", "sbp_values", "sbp_unt_pts", "sbp_trt_pts",
        "smoker_true", "diabetic_true", "age_min", "age_max", "hdl_min",
        "hdl_max", "tc_min", "tc_max", "smoker_min", "smoker_max",
        "diabetic_min", "diabetic_max", "col_unt_min", "col_unt_max",
        "col_trt_min", "col_trt_max", "joint_min", "joint_max",
        "total_lo", "total_hi", "cat_by_total", "mask_by_cat",
    )

    def __init__(self, schedules: ScheduleSet, sex: Sex, domain: SexDomain) -> None:
        per_sex = schedules.for_sex(sex)
        self.sex = sex
        self.schedule = per_sex

        def pts(bins: tuple[Bin, ...], values: tuple[int, ...]) -> tuple[int, ...]:
            out = []
            for v in values:
                for b in bins:
                    if b.contains(v):
                        out.append(b.points)
                        break
                else:
                    raise DomainError(f"{sex.value}: representative {v} outside bins")
            return tuple(out)

        self.age_values = domain.age
        self.age_pts = pts(per_sex.age_bins, domain.age)
        self.hdl_values = domain.hdl
        self.hdl_pts = pts(per_sex.hdl_bins, domain.hdl)
        self.tc_values = domain.total_chol
        self.tc_pts = pts(per_sex.total_chol_bins, domain.total_chol)
        self.sbp_values = domain.sbp
        self.sbp_unt_pts = pts(per_sex.sbp_untreated_bins, domain.sbp)
        self.sbp_trt_pts = pts(per_sex.sbp_treated_bins, domain.sbp)
        self.smoker_true = per_sex.smoker_points
        self.diabetic_true = per_sex.diabetic_points

        self.age_min, self.age_max = min(self.age_pts), max(self.age_pts)
        self.hdl_min, self.hdl_max = min(self.hdl_pts), max(self.hdl_pts)
        self.tc_min, self.tc_max = min(self.tc_pts), max(self.tc_pts)
        self.smoker_min = min(0, self.smoker_true)
        self.smoker_max = max(0, self.smoker_true)
        self.diabetic_min = min(0, self.diabetic_true)
        self.diabetic_max = max(0, self.diabetic_true)
        self.col_unt_min, self.col_unt_max = min(self.sbp_unt_pts), max(self.sbp_unt_pts)
        self.col_trt_min, self.col_trt_max = min(self.sbp_trt_pts), max(self.sbp_trt_pts)
        self.joint_min = min(self.col_unt_min, self.col_trt_min)
        self.joint_max = max(self.col_unt_max, self.col_trt_max)

        self.total_lo = (
            self.age_min + self.hdl_min + self.tc_min + self.joint_min
            + self.smoker_min + self.diabetic_min
        )
        self.total_hi = (
            self.age_max + self.hdl_max + self.tc_max + self.joint_max
            + self.smoker_max + self.diabetic_max
        )
        self.cat_by_total = {}
        self.mask_by_cat = {cat: 0 for cat in RiskCategory}
        for total in range(self.total_lo, self.total_hi + 1):
            rp = per_sex.risk_percent(total)
            if rp.tag == "lt1":
                cat = RiskCategory.LOW
            elif rp.tag == "gt30":
                cat = RiskCategory.HIGH
            elif rp.value < per_sex.low_max_percent:  # type: ignore[operator]
                cat = RiskCategory.LOW
            elif rp.value >= per_sex.high_min_percent:  # type: ignore[operator]
                cat = RiskCategory.HIGH
            else:
                cat = RiskCategory.MODERATE
            self.cat_by_total[total] = cat
            self.mask_by_cat[cat] |= 1 << (total - self.total_lo)

    def pred_mask(self, pred: CategoryPredicate) -> int:
        mask = 0
        for cat in RiskCategory:
            if pred.holds(cat):
                mask |= self.mask_by_cat[cat]
        return mask


class LogicEngine:
    """Decides category entailment/satisfiability over partial instances.

    Stateless after construction: the schedule set and derived tables are
    immutable, so one engine can serve concurrent callers.
    """

    def __init__(self, schedules: ScheduleSet, domains: FeatureDomain | None = None):
        # A non-monotone risk table would break the bounds argument; refuse it.
        for per_sex in schedules.by_sex.values():
            per_sex.validate()
        self.schedules = schedules
        self.domains = domains if domains is not None else FeatureDomain.from_schedules(schedules)
        self._tables = {
            sex: _SexTables(schedules, sex, self.domains.for_sex(sex))
            for sex in schedules.sexes
        }
        self._ref_cache: dict[PatientProfile, dict[Sex, tuple[int, ...]]] = {}

    # -- shared plumbing ---------------------------------------------------

    def _allowed_sexes(self, p: PartialInstance) -> tuple[Sex, ...]:
        if FeatureId.SEX in p.fixed:
            if p.reference.sex not in self._tables:
                raise ScheduleError(f"no schedule loaded for sex {p.reference.sex.value!r}")
            return (p.reference.sex,)
        sexes = tuple(self._tables)
        if len(sexes) < 2:
            raise ScheduleError("sex is free but only one schedule is loaded")
        return sexes

    def _ref_points(self, profile: PatientProfile) -> dict[Sex, tuple[int, ...]]:
        """Per-sex points of the reference values: (age, hdl, tc, sbp_untreated,
        sbp_treated, smoker, diabetic)."""
        cached = self._ref_cache.get(profile)
        if cached is not None:
            return cached
        out = {}
        for sex, t in self._tables.items():
            per_sex = t.schedule

            def lookup(bins: tuple[Bin, ...], value: int, name: str) -> int:
                for b in bins:
                    if b.contains(value):
                        return b.points
                raise DomainError(f"{sex.value}/{name}: value {value} outside all bins")

            out[sex] = (
                lookup(per_sex.age_bins, profile.age, "age"),
                lookup(per_sex.hdl_bins, profile.hdl, "hdl"),
                lookup(per_sex.total_chol_bins, profile.total_chol, "total_chol"),
                lookup(per_sex.sbp_untreated_bins, profile.sbp, "sbp_untreated"),
                lookup(per_sex.sbp_treated_bins, profile.sbp, "sbp_treated"),
                per_sex.smoker_points if profile.smoker else 0,
                per_sex.diabetic_points if profile.diabetic else 0,
            )
        if len(self._ref_cache) > 200_000:
            self._ref_cache.clear()
        self._ref_cache[profile] = out
        return out

    # -- enumeration -------------------------------------------------------

    def completions(self, p: PartialInstance) -> Iterator[PatientProfile]:
        """All completions of ``p`` in canonical enumeration order.

        Features iterate in declaration order (sex outermost), each domain
        ascending; fixed features stay at the reference's values. When sex is
        free, the SBP domain follows each completion's own sex.
        """
        ref = p.reference
        fixed = p.fixed
        for sex in self._allowed_sexes(p):
            d = self.domains.for_sex(sex)
            age_vals = (ref.age,) if FeatureId.AGE in fixed else d.age
            hdl_vals = (ref.hdl,) if FeatureId.HDL in fixed else d.hdl
            tc_vals = (ref.total_chol,) if FeatureId.TOTAL_CHOL in fixed else d.total_chol
            sbp_vals = (ref.sbp,) if FeatureId.SBP in fixed else d.sbp
            trt_vals = (ref.treated_sbp,) if FeatureId.TREATMENT in fixed else (False, True)
            smk_vals = (ref.smoker,) if FeatureId.SMOKER in fixed else (False, True)
            dia_vals = (ref.diabetic,) if FeatureId.DIABETIC in fixed else (False, True)
            for age, hdl, tc, sbp, trt, smk, dia in itertools.product(
                age_vals, hdl_vals, tc_vals, sbp_vals, trt_vals, smk_vals, dia_vals
            ):
                yield PatientProfile(
                    sex=sex, age=age, hdl=hdl, total_chol=tc, sbp=sbp,
                    treated_sbp=trt, smoker=smk, diabetic=dia,
                )

    def entails_category(self, p: PartialInstance, pred: CategoryPredicate) -> bool:
        """Brute-force oracle: every completion, scored through the ordinary
        scoring path, must satisfy the predicate."""
        for profile in self.completions(p):
            _, _, category = assess(self.schedules, profile)
            if not pred.holds(category):
                return False
        return True

    # -- monotone bounds ---------------------------------------------------

    def _sex_bounds(
        self, t: _SexTables, ref: tuple[int, ...], treated_ref: bool, fixed: int
    ) -> tuple[int, int]:
        lo = hi = 0
        if fixed & _AGE_BIT:
            lo += ref[0]
            hi += ref[0]
        else:
            lo += t.age_min
            hi += t.age_max
        if fixed & _HDL_BIT:
            lo += ref[1]
            hi += ref[1]
        else:
            lo += t.hdl_min
            hi += t.hdl_max
        if fixed & _TC_BIT:
            lo += ref[2]
            hi += ref[2]
        else:
            lo += t.tc_min
            hi += t.tc_max
        if fixed & _SMK_BIT:
            lo += ref[5]
            hi += ref[5]
        else:
            lo += t.smoker_min
            hi += t.smoker_max
        if fixed & _DIA_BIT:
            lo += ref[6]
            hi += ref[6]
        else:
            lo += t.diabetic_min
            hi += t.diabetic_max
        # SBP and treatment are bounded jointly: treatment picks the column.
        sbp_fixed = fixed & _SBP_BIT
        trt_fixed = fixed & _TRT_BIT
        if sbp_fixed and trt_fixed:
            p = ref[4] if treated_ref else ref[3]
            lo += p
            hi += p
        elif sbp_fixed:
            lo += min(ref[3], ref[4])
            hi += max(ref[3], ref[4])
        elif trt_fixed:
            if treated_ref:
                lo += t.col_trt_min
                hi += t.col_trt_max
            else:
                lo += t.col_unt_min
                hi += t.col_unt_max
        else:
            lo += t.joint_min
            hi += t.joint_max
        return lo, hi

    def entails_category_fast(self, p: PartialInstance, pred: CategoryPredicate) -> bool:
        """Bounds-based decision, identical in truth value to the oracle.

        Per allowed sex the achievable total spans [lo, hi] with both ends
        attained, and the category is monotone in the total, so the three
        predicate forms are decided by the end categories alone.
        """
        if pred.negated:
            raise ValueError("bounds engine handles only the positive predicate forms")
        fixed = _fixed_mask(p.fixed)
        refs = self._ref_points(p.reference)
        for sex in self._allowed_sexes(p):
            t = self._tables[sex]
            lo, hi = self._sex_bounds(t, refs[sex], p.reference.treated_sbp, fixed)
            c_lo = t.cat_by_total[lo]
            c_hi = t.cat_by_total[hi]
            if pred.kind == "equals":
                ok = c_lo is pred.category and c_hi is pred.category
            elif pred.kind == "at_most":
                ok = c_hi <= pred.category
            else:  # strictly_below
                ok = c_hi < pred.category
            if not ok:
                return False
        return True

    # -- satisfiability ----------------------------------------------------

    def _value_groups(self, sex: Sex, p: PartialInstance):
        """Candidate (value, points) lists per feature slot, ascending."""
        t = self._tables[sex]
        d = self.domains.for_sex(sex)
        ref = p.reference
        refp = self._ref_points(ref)[sex]
        fixed = p.fixed

        if FeatureId.AGE in fixed:
            age = ((ref.age, refp[0]),)
        else:
            age = tuple(zip(d.age, t.age_pts))
        if FeatureId.HDL in fixed:
            hdl = ((ref.hdl, refp[1]),)
        else:
            hdl = tuple(zip(d.hdl, t.hdl_pts))
        if FeatureId.TOTAL_CHOL in fixed:
            tc = ((ref.total_chol, refp[2]),)
        else:
            tc = tuple(zip(d.total_chol, t.tc_pts))
        if FeatureId.SBP in fixed:
            sbp = ((ref.sbp, refp[3], refp[4]),)
        else:
            sbp = tuple(zip(d.sbp, t.sbp_unt_pts, t.sbp_trt_pts))
        trt = (ref.treated_sbp,) if FeatureId.TREATMENT in fixed else (False, True)
        if FeatureId.SMOKER in fixed:
            smk = ((ref.smoker, refp[5]),)
        else:
            smk = ((False, 0), (True, t.smoker_true))
        if FeatureId.DIABETIC in fixed:
            dia = ((ref.diabetic, refp[6]),)
        else:
            dia = ((False, 0), (True, t.diabetic_true))
        return [age, hdl, tc, sbp, trt, smk, dia]

    @staticmethod
    def _achievable(groups) -> tuple[int, int]:
        """Exact achievable-total set as (base, bitmask): bit i <=> base+i."""
        age, hdl, tc, sbp, trt, smk, dia = groups
        joint = tuple(
            (trt_pts if treated else unt_pts)
            for (_v, unt_pts, trt_pts) in sbp
            for treated in trt
        )
        base = 0
        mask = 1
        for pts in (
            tuple(p for _v, p in age),
            tuple(p for _v, p in hdl),
            tuple(p for _v, p in tc),
            joint,
            tuple(p for _v, p in smk),
            tuple(p for _v, p in dia),
        ):
            m = min(pts)
            base += m
            acc = 0
            for v in pts:
                acc |= mask << (v - m)
            mask = acc
        return base, mask

    def _groups_satisfiable(self, t: _SexTables, groups, pred_mask: int) -> bool:
        base, mask = self._achievable(groups)
        return (mask << (base - t.total_lo)) & pred_mask != 0

    def is_satisfiable(self, p: PartialInstance, pred: CategoryPredicate) -> bool:
        """True iff some completion's category satisfies the predicate."""
        for sex in self._allowed_sexes(p):
            t = self._tables[sex]
            if self._groups_satisfiable(t, self._value_groups(sex, p), t.pred_mask(pred)):
                return True
        return False

    def satisfiable(self, p: PartialInstance, pred: CategoryPredicate) -> PatientProfile | None:
        """First completion (canonical enumeration order) satisfying ``pred``.

        Returns None when the predicate is unsatisfiable over completions.
        Equivalent to filtering ``completions`` but prunes whole subtrees
        with exact achievable-total sets.
        """
        for sex in self._allowed_sexes(p):
            t = self._tables[sex]
            pred_mask = t.pred_mask(pred)
            groups = self._value_groups(sex, p)
            if not self._groups_satisfiable(t, groups, pred_mask):
                continue
            # Lexicographic descent: lock the smallest workable value per slot.
            for slot in range(len(groups)):
                candidates = groups[slot]
                if len(candidates) == 1:
                    continue
                for cand in candidates:
                    trial = list(groups)
                    trial[slot] = (cand,)
                    if self._groups_satisfiable(t, trial, pred_mask):
                        groups = trial
                        break
                else:  # pragma: no cover - satisfiability guaranteed above
                    raise AssertionError("descent lost a guaranteed witness")
            age, hdl, tc, sbp, trt, smk, dia = groups
            return PatientProfile(
                sex=sex,
                age=age[0][0],
                hdl=hdl[0][0],
                total_chol=tc[0][0],
                sbp=sbp[0][0],
                treated_sbp=trt[0],
                smoker=smk[0][0],
                diabetic=dia[0][0],
            )
        return None

    def category_of(self, profile: PatientProfile) -> RiskCategory:
        return assess(self.schedules, profile)[2]


_AGE_BIT = _BIT[FeatureId.AGE]
_HDL_BIT = _BIT[FeatureId.HDL]
_TC_BIT = _BIT[FeatureId.TOTAL_CHOL]
_SBP_BIT = _BIT[FeatureId.SBP]
_TRT_BIT = _BIT[FeatureId.TREATMENT]
_SMK_BIT = _BIT[FeatureId.SMOKER]
_DIA_BIT = _BIT[FeatureId.DIABETIC]


def _fixed_mask(fixed: frozenset[FeatureId]) -> int:
    mask = 0
    for f in fixed:
        mask |= _BIT[f]
    return mask
