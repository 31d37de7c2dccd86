"""Exhaustive grid sweep over the quantized input space, plus statistics.

One representative per table range makes the input space finite; the sweep
scores and explains every combination, streams per-instance records to CSV,
and aggregates sparsity/presence statistics. The report prints our numbers
side by side with previously published reference results for the same
exhaustive analysis, with a delta column.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping

from .core import (
    FEATURE_ORDER,
    FeatureId,
    PatientProfile,
    RiskCategory,
    RiskPercent,
    Sex,
    assess,
)
from .engine import CategoryPredicate, FeatureDomain, LogicEngine
from .explain import (
    DEFAULT_POLICY,
    AlreadyAtTarget,
    MutabilityPolicy,
    UnreachableTarget,
    abduce,
    counterfact,
    default_target,
    verify_abductive,
    verify_counterfactual,
)

#: Previously published reference statistics for this exhaustive analysis
#: (sparsity histograms and feature-presence tables). They are reporting
#: context only - never inputs to any computation - and the published run's
#: iteration order is unknown, so deltas are expected to be small but
#: non-zero.
PUBLISHED_STATS: Mapping[str, Mapping] = {
    "abductive_sparsity_percent": {3: 4.00, 4: 18.14, 5: 25.15, 6: 35.97, 7: 16.05, 8: 0.70},
    "abductive_presence": {
        FeatureId.AGE: (21_593, 98.2),
        FeatureId.SBP: (20_329, 92.4),
        FeatureId.SMOKER: (15_662, 71.2),
        FeatureId.HDL: (14_588, 66.3),
        FeatureId.TOTAL_CHOL: (13_095, 59.5),
        FeatureId.TREATMENT: (11_257, 51.2),
        FeatureId.SEX: (6_579, 29.9),
    },
    "counterfactual_sparsity_percent": {1: 47.17, 2: 35.07, 3: 13.06, 4: 3.32, 5: 0.54, 6: 0.84},
    "counterfactual_presence": {
        FeatureId.SBP: (8_330, 43.7),
        FeatureId.TOTAL_CHOL: (8_019, 42.1),
        FeatureId.TREATMENT: (5_958, 31.3),
        FeatureId.HDL: (4_983, 26.2),
        FeatureId.SMOKER: (2_450, 12.9),
        FeatureId.SEX: (0, 0.0),
        FeatureId.AGE: (0, 0.0),
    },
}

TargetRule = Callable[[RiskCategory], CategoryPredicate]


@dataclass(frozen=True)
class GridSpec:
    """Which representative domains (and sexes) the grid enumerates."""

    domains: FeatureDomain
    sexes: tuple[Sex, ...] = (Sex.MALE, Sex.FEMALE)

    def size(self) -> int:
        return sum(self.domains.size(sex) for sex in self.sexes)


def generate_grid(spec: GridSpec) -> Iterator[PatientProfile]:
    """Every representative combination exactly once, in canonical order."""
    for sex in spec.sexes:
        d = spec.domains.for_sex(sex)
        for age, hdl, tc, sbp, trt, smk, dia in itertools.product(
            d.age, d.hdl, d.total_chol, d.sbp, (False, True), (False, True), (False, True)
        ):
            yield PatientProfile(
                sex=sex, age=age, hdl=hdl, total_chol=tc, sbp=sbp,
                treated_sbp=trt, smoker=smk, diabetic=dia,
            )


@dataclass(frozen=True)
class InstanceRecord:
    """Outcome of scoring and explaining one grid instance."""

    profile: PatientProfile
    total: int
    percent: RiskPercent
    category: RiskCategory
    abductive: frozenset[FeatureId]
    cf_status: str  # "ok" | "already_at_target" | "unreachable"
    cf_changed: frozenset[FeatureId] | None


def sweep(
    engine: LogicEngine,
    grid: Iterable[PatientProfile] | None = None,
    order: tuple[FeatureId, ...] | None = None,
    policy: MutabilityPolicy = DEFAULT_POLICY,
    target_rule: TargetRule | None = None,
    verify: bool = True,
) -> Iterator[InstanceRecord]:
    """Score and explain every grid instance.

    Args:
        engine: entailment engine over both loaded schedules.
        grid: profiles to process; defaults to the full grid of the
            engine's domains.
        order: explainer iteration order (default: declaration order).
        policy: mutability policy for counterfactuals.
        target_rule: maps a category to its counterfactual target;
            defaults to the immediately lower category.
        verify: re-check the explainer invariants on every instance and
            abort with context on any violation.

    Yields:
        One InstanceRecord per instance, in grid order.
    """
    if grid is None:
        grid = generate_grid(GridSpec(engine.domains, tuple(engine.schedules.sexes)))
    rule = target_rule or default_target
    for profile in grid:
        breakdown, rp, category = assess(engine.schedules, profile)
        abduction = abduce(engine, profile, order)
        if verify:
            try:
                verify_abductive(engine, profile, abduction)
            except Exception as exc:
                raise RuntimeError(f"abductive invariant violated at {profile}: {exc}") from exc
        cf_status = "ok"
        cf_changed: frozenset[FeatureId] | None = None
        try:
            target = rule(category)
            if target.holds(category):
                raise AlreadyAtTarget(f"already {category.label}")
            cf = counterfact(engine, profile, target, policy, order)
            cf_changed = cf.changed
            if verify:
                try:
                    verify_counterfactual(engine, profile, cf, policy)
                except Exception as exc:
                    raise RuntimeError(
                        f"counterfactual invariant violated at {profile}: {exc}"
                    ) from exc
        except AlreadyAtTarget:
            cf_status = "already_at_target"
        except UnreachableTarget:
            cf_status = "unreachable"
        yield InstanceRecord(
            profile=profile,
            total=breakdown.total,
            percent=rp,
            category=category,
            abductive=abduction.features,
            cf_status=cf_status,
            cf_changed=cf_changed,
        )


# ---------------------------------------------------------------------------
# CSV streaming
# ---------------------------------------------------------------------------

CSV_COLUMNS = [
    "sex", "age", "hdl", "total_chol", "sbp", "treated", "smoker", "diabetic",
    "total_points", "risk_percent", "category", "abductive", "cf_status", "cf_changed",
]


def _join_features(features: Iterable[FeatureId]) -> str:
    members = set(features)
    return ";".join(f.value for f in FEATURE_ORDER if f in members)


def write_records_csv(records: Iterable[InstanceRecord], path: str | Path) -> int:
    """Stream records to CSV; returns the number of rows written."""
    count = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            p = rec.profile
            writer.writerow(
                [
                    p.sex.value, p.age, p.hdl, p.total_chol, p.sbp,
                    str(p.treated_sbp).lower(), str(p.smoker).lower(),
                    str(p.diabetic).lower(), rec.total, str(rec.percent),
                    rec.category.label, _join_features(rec.abductive), rec.cf_status,
                    "" if rec.cf_changed is None else _join_features(rec.cf_changed),
                ]
            )
            count += 1
    return count


def read_records_csv(path: str | Path) -> Iterator[InstanceRecord]:
    """Parse records back from CSV (the aggregation second pass)."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            percent_text = row["risk_percent"]
            if percent_text == "<1":
                percent = RiskPercent.less_than_one()
            elif percent_text == ">30":
                percent = RiskPercent.greater_than_thirty()
            else:
                percent = RiskPercent.exact(float(percent_text))
            status = row["cf_status"]
            changed_text = row["cf_changed"]
            yield InstanceRecord(
                profile=PatientProfile(
                    sex=Sex(row["sex"]),
                    age=int(row["age"]),
                    hdl=int(row["hdl"]),
                    total_chol=int(row["total_chol"]),
                    sbp=int(row["sbp"]),
                    treated_sbp=row["treated"] == "true",
                    smoker=row["smoker"] == "true",
                    diabetic=row["diabetic"] == "true",
                ),
                total=int(row["total_points"]),
                percent=percent,
                category=RiskCategory[row["category"].upper()],
                abductive=frozenset(
                    FeatureId(name) for name in row["abductive"].split(";") if name
                ),
                cf_status=status,
                cf_changed=None
                if status != "ok"
                else frozenset(FeatureId(name) for name in changed_text.split(";") if name),
            )


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

@dataclass
class SweepReport:
    """Aggregate sparsity and feature-presence statistics for one sweep."""

    total: int = 0
    by_sex: dict[Sex, int] = field(default_factory=dict)
    by_category: dict[RiskCategory, int] = field(default_factory=dict)
    abductive_sparsity: dict[int, int] = field(default_factory=dict)
    abductive_presence: dict[FeatureId, int] = field(default_factory=dict)
    cf_population: int = 0  # moderate + high instances
    cf_explained: int = 0
    cf_unreachable: int = 0
    cf_sparsity: dict[int, int] = field(default_factory=dict)
    cf_presence: dict[FeatureId, int] = field(default_factory=dict)

    def abductive_sparsity_percent(self) -> dict[int, float]:
        return {k: 100.0 * v / self.total for k, v in sorted(self.abductive_sparsity.items())}

    def abductive_presence_percent(self) -> dict[FeatureId, float]:
        return {f: 100.0 * self.abductive_presence.get(f, 0) / self.total for f in FEATURE_ORDER}

    def cf_sparsity_percent(self) -> dict[int, float]:
        if not self.cf_explained:
            return {}
        return {k: 100.0 * v / self.cf_explained for k, v in sorted(self.cf_sparsity.items())}

    def cf_presence_percent(self) -> dict[FeatureId, float]:
        if not self.cf_population:
            return {f: 0.0 for f in FEATURE_ORDER}
        return {
            f: 100.0 * self.cf_presence.get(f, 0) / self.cf_population for f in FEATURE_ORDER
        }

    def to_json_dict(self) -> dict:
        return {
            "instances": {
                "total": self.total,
                **{sex.value: n for sex, n in self.by_sex.items()},
            },
            "categories": {cat.label: self.by_category.get(cat, 0) for cat in RiskCategory},
            "abductive": {
                "sparsity": {
                    str(size): {
                        "count": self.abductive_sparsity[size],
                        "percent": round(pct, 4),
                    }
                    for size, pct in self.abductive_sparsity_percent().items()
                },
                "presence": {
                    f.value: {
                        "count": self.abductive_presence.get(f, 0),
                        "percent": round(pct, 4),
                    }
                    for f, pct in self.abductive_presence_percent().items()
                },
            },
            "counterfactual": {
                "population": self.cf_population,
                "explained": self.cf_explained,
                "unreachable": self.cf_unreachable,
                "sparsity": {
                    str(size): {"count": self.cf_sparsity[size], "percent": round(pct, 4)}
                    for size, pct in self.cf_sparsity_percent().items()
                },
                "presence": {
                    f.value: {
                        "count": self.cf_presence.get(f, 0),
                        "percent": round(pct, 4),
                    }
                    for f, pct in self.cf_presence_percent().items()
                },
            },
            "published_reference": _published_json(),
        }


def aggregate(records: Iterable[InstanceRecord]) -> SweepReport:
    """Reduce records into the sparsity/presence report."""
    report = SweepReport()
    for rec in records:
        report.total += 1
        report.by_sex[rec.profile.sex] = report.by_sex.get(rec.profile.sex, 0) + 1
        report.by_category[rec.category] = report.by_category.get(rec.category, 0) + 1
        size = len(rec.abductive)
        report.abductive_sparsity[size] = report.abductive_sparsity.get(size, 0) + 1
        for f in rec.abductive:
            report.abductive_presence[f] = report.abductive_presence.get(f, 0) + 1
        if rec.category is not RiskCategory.LOW:
            report.cf_population += 1
            if rec.cf_status == "unreachable":
                report.cf_unreachable += 1
            elif rec.cf_status == "ok":
                assert rec.cf_changed is not None
                report.cf_explained += 1
                csize = len(rec.cf_changed)
                report.cf_sparsity[csize] = report.cf_sparsity.get(csize, 0) + 1
                for f in rec.cf_changed:
                    report.cf_presence[f] = report.cf_presence.get(f, 0) + 1
    return report


def _published_json() -> dict:
    return {
        "abductive_sparsity_percent": {
            str(k): v for k, v in PUBLISHED_STATS["abductive_sparsity_percent"].items()
        },
        "abductive_presence": {
            f.value: {"count": c, "percent": p}
            for f, (c, p) in PUBLISHED_STATS["abductive_presence"].items()
        },
        "counterfactual_sparsity_percent": {
            str(k): v for k, v in PUBLISHED_STATS["counterfactual_sparsity_percent"].items()
        },
        "counterfactual_presence": {
            f.value: {"count": c, "percent": p}
            for f, (c, p) in PUBLISHED_STATS["counterfactual_presence"].items()
        },
    }


def format_report(report: SweepReport) -> str:
    """Plain-text tables with side-by-side deltas against published values."""
    lines: list[str] = []
    male = report.by_sex.get(Sex.MALE, 0)
    female = report.by_sex.get(Sex.FEMALE, 0)
    lines.append(
        f"{report.total} instances (male {male}, female {female})"
    )
    cats = ", ".join(
        f"{cat.label} {report.by_category.get(cat, 0)}" for cat in RiskCategory
    )
    lines.append(f"categories: {cats}")
    lines.append(
        f"counterfactual population (moderate+high): {report.cf_population}; "
        f"explained {report.cf_explained}; unreachable {report.cf_unreachable}"
    )
    lines.append("")

    def fmt_pct(x: float | None) -> str:
        return "-" if x is None else f"{x:.2f}"

    def delta(ours: float | None, published: float | None) -> str:
        if ours is None or published is None:
            return "-"
        return f"{ours - published:+.2f}"

    lines.append("Abductive explanation sparsity (% of all instances)")
    lines.append(f"{'size':>4}  {'count':>6}  {'ours%':>7}  {'published%':>10}  {'delta':>7}")
    pub_ab = PUBLISHED_STATS["abductive_sparsity_percent"]
    ours_ab = report.abductive_sparsity_percent()
    for size in sorted(set(ours_ab) | set(pub_ab)):
        ours = ours_ab.get(size)
        pub = pub_ab.get(size)
        count = report.abductive_sparsity.get(size, 0)
        lines.append(
            f"{size:>4}  {count:>6}  {fmt_pct(ours):>7}  {fmt_pct(pub):>10}  "
            f"{delta(ours, pub):>7}"
        )
    lines.append("")

    lines.append("Feature presence in abductive explanations (% of all instances)")
    lines.append(
        f"{'feature':<12}  {'count':>6}  {'ours%':>7}  {'published%':>10}  {'delta':>7}"
    )
    pub_pres = PUBLISHED_STATS["abductive_presence"]
    ours_pres = report.abductive_presence_percent()
    for f in FEATURE_ORDER:
        pub_entry = pub_pres.get(f)
        lines.append(
            f"{f.value:<12}  {report.abductive_presence.get(f, 0):>6}  "
            f"{fmt_pct(ours_pres[f]):>7}  "
            f"{fmt_pct(pub_entry[1] if pub_entry else None):>10}  "
            f"{delta(ours_pres[f], pub_entry[1] if pub_entry else None):>7}"
        )
    lines.append("")

    lines.append(
        "Counterfactual change-set sparsity (% of explained moderate/high instances)"
    )
    lines.append(f"{'size':>4}  {'count':>6}  {'ours%':>7}  {'published%':>10}  {'delta':>7}")
    pub_cf = PUBLISHED_STATS["counterfactual_sparsity_percent"]
    ours_cf = report.cf_sparsity_percent()
    for size in sorted(set(ours_cf) | set(pub_cf)):
        ours = ours_cf.get(size)
        pub = pub_cf.get(size)
        count = report.cf_sparsity.get(size, 0)
        lines.append(
            f"{size:>4}  {count:>6}  {fmt_pct(ours):>7}  {fmt_pct(pub):>10}  "
            f"{delta(ours, pub):>7}"
        )
    lines.append("")

    lines.append(
        "Feature presence in counterfactual change sets (% of moderate+high instances)"
    )
    lines.append(
        f"{'feature':<12}  {'count':>6}  {'ours%':>7}  {'published%':>10}  {'delta':>7}"
    )
    pub_cfp = PUBLISHED_STATS["counterfactual_presence"]
    ours_cfp = report.cf_presence_percent()
    for f in FEATURE_ORDER:
        pub_entry = pub_cfp.get(f)
        lines.append(
            f"{f.value:<12}  {report.cf_presence.get(f, 0):>6}  "
            f"{fmt_pct(ours_cfp[f]):>7}  "
            f"{fmt_pct(pub_entry[1] if pub_entry else None):>10}  "
            f"{delta(ours_cfp[f], pub_entry[1] if pub_entry else None):>7}"
        )
    return "\n".join(lines) + "\n"


def run_sweep_to_files(
    engine: LogicEngine,
    out_dir: str | Path,
    grid: Iterable[PatientProfile] | None = None,
    order: tuple[FeatureId, ...] | None = None,
    policy: MutabilityPolicy = DEFAULT_POLICY,
    target_rule: TargetRule | None = None,
    verify: bool = True,
) -> tuple[SweepReport, Path, Path, Path]:
    """Stream a sweep to ``records.csv`` and write text/JSON reports.

    Returns the report plus the three output paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / "records.csv"
    records = sweep(engine, grid, order, policy, target_rule, verify)
    write_records_csv(records, records_path)
    report = aggregate(read_records_csv(records_path))
    text_path = out_dir / "report.txt"
    json_path = out_dir / "report.json"
    text_path.write_text(format_report(report))
    json_path.write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    return report, records_path, text_path, json_path
