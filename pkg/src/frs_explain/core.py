"""Tabular cardiovascular risk model: point tables, scoring, categories.

The whole model is data: per-sex point tables for each feature, a
points-to-risk-percent table, and two category thresholds. Schedules are
loaded from JSON documents (one per sex) and are immutable afterwards, so
every operation here is a pure function of its inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import total_ordering
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping
from types import MappingProxyType


class ScheduleError(ValueError):
    """A schedule document is malformed or violates a table invariant."""


class DomainError(ValueError):
    """A profile value falls outside the model's domain."""


class Sex(Enum):
    MALE = "male"
    FEMALE = "female"


class RiskCategory(IntEnum):
    """Ordered risk categories; comparisons follow clinical severity."""

    LOW = 0
    MODERATE = 1
    HIGH = 2

    @property
    def label(self) -> str:
        return self.name.lower()


class FeatureId(Enum):
    """The eight model features, in canonical iteration order.

    Declaration order is the default order everywhere an iteration order
    matters (explainer loops, grid enumeration, CLI/report output).
    """

    SEX = "sex"
    AGE = "age"
    HDL = "hdl"
    TOTAL_CHOL = "total_chol"
    SBP = "sbp"
    TREATMENT = "treatment"
    SMOKER = "smoker"
    DIABETIC = "diabetic"


FEATURE_ORDER: tuple[FeatureId, ...] = tuple(FeatureId)

#: Features that contribute points directly (sex selects the table,
#: treatment selects the SBP column).
POINT_FEATURES: tuple[FeatureId, ...] = (
    FeatureId.AGE,
    FeatureId.HDL,
    FeatureId.TOTAL_CHOL,
    FeatureId.SBP,
    FeatureId.SMOKER,
    FeatureId.DIABETIC,
)

DISPLAY_NAMES: Mapping[FeatureId, str] = MappingProxyType(
    {
        FeatureId.SEX: "sex",
        FeatureId.AGE: "age",
        FeatureId.HDL: "HDL cholesterol",
        FeatureId.TOTAL_CHOL: "total cholesterol",
        FeatureId.SBP: "systolic blood pressure",
        FeatureId.TREATMENT: "blood pressure treatment",
        FeatureId.SMOKER: "smoking status",
        FeatureId.DIABETIC: "diabetes",
    }
)


@total_ordering
@dataclass(frozen=True)
class RiskPercent:
    """Risk percentage from the points table.

    The table's extreme rows carry tags rather than numbers ("<1", ">30");
    they order below and above every exact value respectively.
    """

    tag: str  # "lt1" | "exact" | "gt30"
    value: float | None = None

    def __post_init__(self) -> None:
        if self.tag not in ("lt1", "exact", "gt30"):
            raise ScheduleError(f"unknown risk percent tag {self.tag!r}")
        if self.tag == "exact":
            if self.value is None:
                raise ScheduleError("exact risk percent requires a value")
            # "<1" and ">30" rows bracket the exact values, so exact
            # percents outside [1, 30] would break the total order.
            if not 1.0 <= self.value <= 30.0:
                raise ScheduleError(
                    f"exact risk percent {self.value} outside [1, 30]"
                )
        elif self.value is not None:
            raise ScheduleError(f"{self.tag} risk percent carries no value")

    @classmethod
    def less_than_one(cls) -> "RiskPercent":
        return cls("lt1")

    @classmethod
    def exact(cls, value: float) -> "RiskPercent":
        return cls("exact", float(value))

    @classmethod
    def greater_than_thirty(cls) -> "RiskPercent":
        return cls("gt30")

    def _key(self) -> tuple[int, float]:
        if self.tag == "lt1":
            return (0, 0.0)
        if self.tag == "exact":
            return (1, self.value)  # type: ignore[return-value]
        return (2, 0.0)

    def __lt__(self, other: "RiskPercent") -> bool:
        if not isinstance(other, RiskPercent):
            return NotImplemented
        return self._key() < other._key()

    def __str__(self) -> str:
        if self.tag == "lt1":
            return "<1"
        if self.tag == "gt30":
            return ">30"
        return f"{self.value:g}"

    def json_value(self) -> float | str:
        """Wire form: a number, or the tag strings "lt1"/"gt30"."""
        return self.value if self.tag == "exact" else self.tag


@dataclass(frozen=True)
class Bin:
    """Half-open integer interval [min, max) worth a fixed number of points.

    ``min=None`` means open below, ``max=None`` open above.
    """

    min: int | None
    max: int | None
    points: int

    def contains(self, value: int) -> bool:
        if self.min is not None and value < self.min:
            return False
        if self.max is not None and value >= self.max:
            return False
        return True

    def representative(self) -> int:
        """Deterministic in-bin value: lower bound, or max-1 if open below."""
        if self.min is not None:
            return self.min
        if self.max is not None:
            return self.max - 1
        raise ValueError("bin unbounded on both sides has no representative")

    @property
    def label(self) -> str:
        if self.min is None:
            return f"<{self.max}"
        if self.max is None:
            return f"{self.min}+"
        return f"{self.min}-{self.max - 1}"

    def __str__(self) -> str:
        lo = "-inf" if self.min is None else str(self.min)
        hi = "+inf" if self.max is None else str(self.max)
        return f"[{lo}, {hi})"


@dataclass(frozen=True)
class PatientProfile:
    """One individual's raw feature values."""

    sex: Sex
    age: int
    hdl: int
    total_chol: int
    sbp: int
    treated_sbp: bool = False
    smoker: bool = False
    diabetic: bool = False

    def __post_init__(self) -> None:
        if self.age < 30:
            raise DomainError(f"age {self.age} below model domain (minimum 30)")
        for name in ("hdl", "total_chol", "sbp"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be strictly positive")

    def value(self, feature: FeatureId):
        return getattr(self, _PROFILE_ATTR[feature])

    def with_values(self, values: Mapping[FeatureId, object]) -> "PatientProfile":
        """Copy of this profile with the given features replaced."""
        kwargs = {_PROFILE_ATTR[f]: self.value(f) for f in FeatureId}
        for f, v in values.items():
            kwargs[_PROFILE_ATTR[f]] = v
        return PatientProfile(**kwargs)


_PROFILE_ATTR: Mapping[FeatureId, str] = MappingProxyType(
    {
        FeatureId.SEX: "sex",
        FeatureId.AGE: "age",
        FeatureId.HDL: "hdl",
        FeatureId.TOTAL_CHOL: "total_chol",
        FeatureId.SBP: "sbp",
        FeatureId.TREATMENT: "treated_sbp",
        FeatureId.SMOKER: "smoker",
        FeatureId.DIABETIC: "diabetic",
    }
)


@dataclass(frozen=True)
class ScoreBreakdown:
    """Per-feature points and their total for one profile."""

    age: int
    hdl: int
    total_chol: int
    sbp: int
    smoker: int
    diabetic: int
    total: int

    def __post_init__(self) -> None:
        parts = self.age + self.hdl + self.total_chol + self.sbp + self.smoker + self.diabetic
        if parts != self.total:
            raise ValueError(f"breakdown total {self.total} != sum of parts {parts}")

    def as_dict(self) -> dict[str, int]:
        return {
            "age": self.age,
            "hdl": self.hdl,
            "total_chol": self.total_chol,
            "sbp": self.sbp,
            "smoker": self.smoker,
            "diabetic": self.diabetic,
            "total": self.total,
        }


@dataclass(frozen=True)
class PerSexSchedule:
    """All tables for one sex: feature bins, boolean points, risk rows."""

    sex: Sex
    age_bins: tuple[Bin, ...]
    hdl_bins: tuple[Bin, ...]
    total_chol_bins: tuple[Bin, ...]
    sbp_untreated_bins: tuple[Bin, ...]
    sbp_treated_bins: tuple[Bin, ...]
    smoker_points: int
    diabetic_points: int
    risk_rows: tuple[tuple[int, RiskPercent], ...]  # ascending, contiguous
    low_max_percent: float
    high_min_percent: float

    def bins_for(self, feature: FeatureId, treated: bool = False) -> tuple[Bin, ...]:
        if feature is FeatureId.AGE:
            return self.age_bins
        if feature is FeatureId.HDL:
            return self.hdl_bins
        if feature is FeatureId.TOTAL_CHOL:
            return self.total_chol_bins
        if feature is FeatureId.SBP:
            return self.sbp_treated_bins if treated else self.sbp_untreated_bins
        raise ValueError(f"{feature.value} has no bin table")

    def risk_percent(self, total: int) -> RiskPercent:
        rows = self.risk_rows
        if not rows:
            raise ScheduleError(f"{self.sex.value}: empty risk table")
        first_pts, first_rp = rows[0]
        if total <= first_pts:
            return first_rp
        last_pts, last_rp = rows[-1]
        if total >= last_pts:
            return last_rp
        # Rows are contiguous in points, so the middle lookup is direct.
        return rows[total - first_pts][1]

    def achievable_total_range(self) -> tuple[int, int]:
        """Min and max total over every profile of this sex."""
        lo = hi = 0
        for bins in (self.age_bins, self.hdl_bins, self.total_chol_bins):
            pts = [b.points for b in bins]
            lo += min(pts)
            hi += max(pts)
        sbp_pts = [b.points for b in self.sbp_untreated_bins + self.sbp_treated_bins]
        lo += min(sbp_pts)
        hi += max(sbp_pts)
        lo += min(0, self.smoker_points) + min(0, self.diabetic_points)
        hi += max(0, self.smoker_points) + max(0, self.diabetic_points)
        return lo, hi

    def risk_is_monotone(self) -> bool:
        rows = self.risk_rows
        return all(rows[i][1] <= rows[i + 1][1] for i in range(len(rows) - 1))

    def validate(self) -> None:
        """Check every table invariant; raise ScheduleError with context."""
        for name, bins in (
            ("age", self.age_bins),
            ("hdl", self.hdl_bins),
            ("total_chol", self.total_chol_bins),
            ("sbp_untreated", self.sbp_untreated_bins),
            ("sbp_treated", self.sbp_treated_bins),
        ):
            _validate_bins(f"{self.sex.value}/{name}", bins)
        rows = self.risk_rows
        if not rows:
            raise ScheduleError(f"{self.sex.value}: risk table is empty")
        for i in range(len(rows) - 1):
            if rows[i + 1][0] != rows[i][0] + 1:
                raise ScheduleError(
                    f"{self.sex.value}: risk rows not contiguous at points "
                    f"{rows[i][0]} -> {rows[i + 1][0]}"
                )
        if not self.risk_is_monotone():
            raise ScheduleError(f"{self.sex.value}: risk percents are not non-decreasing")
        if not self.low_max_percent < self.high_min_percent:
            raise ScheduleError(
                f"{self.sex.value}: category thresholds out of order "
                f"({self.low_max_percent} >= {self.high_min_percent})"
            )


def _validate_bins(context: str, bins: tuple[Bin, ...]) -> None:
    """Bins must be stored ascending, pairwise disjoint and contiguous, with
    at most one open end on each side."""
    if not bins:
        raise ScheduleError(f"{context}: no bins")
    for i, b in enumerate(bins):
        if b.min is not None and b.max is not None and not b.min < b.max:
            raise ScheduleError(f"{context}: empty bin {b}")
        if b.min is None and i != 0:
            raise ScheduleError(f"{context}: open-below bin {b} is not first")
        if b.max is None and i != len(bins) - 1:
            raise ScheduleError(f"{context}: open-above bin {b} is not last")
    for prev, cur in zip(bins, bins[1:]):
        assert prev.max is not None and cur.min is not None  # by the open-end checks
        if cur.min < prev.max:
            raise ScheduleError(f"{context}: overlapping bins {prev} and {cur}")
        if cur.min > prev.max:
            raise ScheduleError(f"{context}: gap between bins {prev} and {cur}")


@dataclass(frozen=True)
class ScheduleSet:
    """Immutable bundle of per-sex schedules; the entire model as data."""

    by_sex: Mapping[Sex, PerSexSchedule]

    def __post_init__(self) -> None:
        if not self.by_sex:
            raise ScheduleError("schedule set is empty")
        object.__setattr__(self, "by_sex", MappingProxyType(dict(self.by_sex)))
        thresholds = {
            (s.low_max_percent, s.high_min_percent) for s in self.by_sex.values()
        }
        if len(thresholds) > 1:
            raise ScheduleError(f"category thresholds differ across sexes: {thresholds}")

    def for_sex(self, sex: Sex) -> PerSexSchedule:
        try:
            return self.by_sex[sex]
        except KeyError:
            raise ScheduleError(f"no schedule loaded for sex {sex.value!r}") from None

    @property
    def sexes(self) -> tuple[Sex, ...]:
        return tuple(s for s in Sex if s in self.by_sex)

    @property
    def low_max_percent(self) -> float:
        return next(iter(self.by_sex.values())).low_max_percent

    @property
    def high_min_percent(self) -> float:
        return next(iter(self.by_sex.values())).high_min_percent


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def parse_schedule(document: str | dict) -> PerSexSchedule:
    """Parse and validate one per-sex schedule document.

    Args:
        document: JSON text or an already-decoded document.

    Returns:
        A validated, immutable PerSexSchedule.

    Raises:
        ScheduleError: on parse failure or any violated table invariant,
            naming the feature and offending bin.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScheduleError(f"schedule is not valid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ScheduleError("schedule document must be a JSON object")

    sex_name = doc.get("sex")
    try:
        sex = Sex(sex_name)
    except ValueError:
        raise ScheduleError(f"missing or unknown sex block: {sex_name!r}") from None

    features = doc.get("features")
    if not isinstance(features, dict):
        raise ScheduleError(f"{sex.value}: missing features block")

    def bin_table(name: str) -> tuple[Bin, ...]:
        raw = features.get(name)
        if not isinstance(raw, list):
            raise ScheduleError(f"{sex.value}/{name}: missing bin array")
        bins = []
        for entry in raw:
            try:
                bins.append(Bin(entry["min"], entry["max"], int(entry["points"])))
            except (KeyError, TypeError) as exc:
                raise ScheduleError(f"{sex.value}/{name}: malformed bin {entry!r}") from exc
        ordered = tuple(
            sorted(bins, key=lambda b: float("-inf") if b.min is None else b.min)
        )
        return ordered

    def boolean_points(name: str) -> int:
        raw = features.get(name)
        if not isinstance(raw, dict) or "true" not in raw or "false" not in raw:
            raise ScheduleError(f'{sex.value}/{name}: expected {{"true": n, "false": n}}')
        if int(raw["false"]) != 0:
            raise ScheduleError(f"{sex.value}/{name}: false must carry 0 points")
        return int(raw["true"])

    raw_rows = doc.get("risk")
    if not isinstance(raw_rows, list) or not raw_rows:
        raise ScheduleError(f"{sex.value}: missing risk table")
    rows = []
    for entry in raw_rows:
        try:
            pts = int(entry["points"])
            pct = entry["percent"]
        except (KeyError, TypeError) as exc:
            raise ScheduleError(f"{sex.value}: malformed risk row {entry!r}") from exc
        if pct == "lt1":
            rp = RiskPercent.less_than_one()
        elif pct == "gt30":
            rp = RiskPercent.greater_than_thirty()
        elif isinstance(pct, (int, float)) and not isinstance(pct, bool):
            rp = RiskPercent.exact(float(pct))
        else:
            raise ScheduleError(f"{sex.value}: bad risk percent {pct!r} at {pts} points")
        rows.append((pts, rp))
    rows.sort(key=lambda r: r[0])

    cats = doc.get("categories")
    if not isinstance(cats, dict):
        raise ScheduleError(f"{sex.value}: missing categories block")
    try:
        low_max = float(cats["low_max_percent"])
        high_min = float(cats["high_min_percent"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ScheduleError(f"{sex.value}: malformed categories block") from exc

    schedule = PerSexSchedule(
        sex=sex,
        age_bins=bin_table("age"),
        hdl_bins=bin_table("hdl"),
        total_chol_bins=bin_table("total_chol"),
        sbp_untreated_bins=bin_table("sbp_untreated"),
        sbp_treated_bins=bin_table("sbp_treated"),
        smoker_points=boolean_points("smoker"),
        diabetic_points=boolean_points("diabetic"),
        risk_rows=tuple(rows),
        low_max_percent=low_max,
        high_min_percent=high_min,
    )
    schedule.validate()
    return schedule


def load_schedules(paths: Iterable[str | Path]) -> ScheduleSet:
    """Load one schedule file per sex into an immutable ScheduleSet."""
    by_sex: dict[Sex, PerSexSchedule] = {}
    for path in paths:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ScheduleError(f"cannot read schedule file {path}: {exc}") from exc
        schedule = parse_schedule(text)
        if schedule.sex in by_sex:
            raise ScheduleError(f"duplicate schedule for sex {schedule.sex.value!r}")
        by_sex[schedule.sex] = schedule
    return ScheduleSet(by_sex)


def bundled_schedule_dir() -> Path:
    """Directory holding the schedule files shipped with the package."""
    return Path(resources.files("frs_explain").joinpath("data"))  # type: ignore[arg-type]


def load_schedule_dir(directory: str | Path) -> ScheduleSet:
    """Load ``male.json``/``female.json`` from a directory (either optional,
    at least one required)."""
    directory = Path(directory)
    paths = [directory / f"{sex.value}.json" for sex in Sex]
    present = [p for p in paths if p.exists()]
    if not present:
        raise ScheduleError(f"no schedule files (male.json/female.json) in {directory}")
    return load_schedules(present)


def load_default_schedules() -> ScheduleSet:
    """Load the schedules bundled with the package."""
    return load_schedule_dir(bundled_schedule_dir())


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def _bin_points(context: str, bins: tuple[Bin, ...], value: int) -> int:
    for b in bins:
        if b.contains(value):
            return b.points
    raise DomainError(f"{context}: value {value} outside all bins")


def feature_points(
    schedule: ScheduleSet, sex: Sex, feature: FeatureId, profile: PatientProfile
) -> int:
    """Points one feature contributes for the given profile under ``sex``.

    SBP is scored in the treated or untreated column according to
    ``profile.treated_sbp``; the boolean features map to 0 or the table
    value. Sex and treatment carry no points of their own.
    """
    per_sex = schedule.for_sex(sex)
    if feature is FeatureId.SMOKER:
        return per_sex.smoker_points if profile.smoker else 0
    if feature is FeatureId.DIABETIC:
        return per_sex.diabetic_points if profile.diabetic else 0
    if feature in (FeatureId.SEX, FeatureId.TREATMENT):
        raise ValueError(f"{feature.value} carries no points of its own")
    bins = per_sex.bins_for(feature, treated=profile.treated_sbp)
    context = f"{sex.value}/{feature.value}"
    if feature is FeatureId.SBP:
        context += "_treated" if profile.treated_sbp else "_untreated"
    return _bin_points(context, bins, profile.value(feature))


def total_points(schedule: ScheduleSet, profile: PatientProfile) -> ScoreBreakdown:
    """Score a full profile against its own sex's tables."""
    sex = profile.sex
    parts = {f.value: feature_points(schedule, sex, f, profile) for f in POINT_FEATURES}
    return ScoreBreakdown(
        age=parts["age"],
        hdl=parts["hdl"],
        total_chol=parts["total_chol"],
        sbp=parts["sbp"],
        smoker=parts["smoker"],
        diabetic=parts["diabetic"],
        total=sum(parts.values()),
    )


def risk_percent(schedule: ScheduleSet, sex: Sex, total: int) -> RiskPercent:
    """Risk percentage for a total, from the sex's points-to-risk table."""
    return schedule.for_sex(sex).risk_percent(total)


def categorize(schedule: ScheduleSet, rp: RiskPercent) -> RiskCategory:
    """Map a risk percentage to its category.

    A percent exactly at the low/moderate boundary is Moderate; exactly at
    the moderate/high boundary is High.
    """
    if rp.tag == "lt1":
        return RiskCategory.LOW
    if rp.tag == "gt30":
        return RiskCategory.HIGH
    assert rp.value is not None
    if rp.value < schedule.low_max_percent:
        return RiskCategory.LOW
    if rp.value >= schedule.high_min_percent:
        return RiskCategory.HIGH
    return RiskCategory.MODERATE


def assess(schedule: ScheduleSet, profile: PatientProfile):
    """Convenience: breakdown, risk percent and category in one call."""
    breakdown = total_points(schedule, profile)
    rp = risk_percent(schedule, profile.sex, breakdown.total)
    return breakdown, rp, categorize(schedule, rp)
