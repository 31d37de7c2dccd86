"""Command-line interface: score, explain, sweep, serve.

Exit codes: 0 success, 2 invalid or missing input values, 3 counterfactual
target unreachable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .assessment import assessment_payload, counterfactual_payload, feature_names
from .core import (
    DISPLAY_NAMES,
    DomainError,
    FeatureId,
    PatientProfile,
    RiskCategory,
    ScheduleError,
    ScheduleSet,
    Sex,
    assess,
    bundled_schedule_dir,
    load_schedule_dir,
)
from .engine import CategoryPredicate, LogicEngine
from .explain import (
    AGE_SEX_ONLY_POLICY,
    DEFAULT_POLICY,
    AlreadyAtTarget,
    MutabilityPolicy,
    UnreachableTarget,
    abduce,
)
from .sweep import GridSpec, format_report, generate_grid, run_sweep_to_files

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNREACHABLE = 3

ENV_SCHEDULE_DIR = "FRS_SCHEDULE_DIR"


def resolve_schedule_dir(flag_value: str | None) -> Path:
    """Flag, then environment variable, then the bundled files."""
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(ENV_SCHEDULE_DIR)
    if env:
        return Path(env)
    return bundled_schedule_dir()


def _add_profile_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sex", choices=[s.value for s in Sex], required=True)
    parser.add_argument("--age", type=int, required=True, help="age in years (30+)")
    parser.add_argument("--hdl", type=int, required=True, help="HDL cholesterol, mg/dL")
    parser.add_argument("--total-chol", type=int, required=True, help="total cholesterol, mg/dL")
    parser.add_argument("--sbp", type=int, required=True, help="systolic blood pressure, mm Hg")
    parser.add_argument("--treated", action="store_true", help="on blood pressure treatment")
    parser.add_argument("--smoker", action="store_true")
    parser.add_argument("--diabetic", action="store_true")


def _add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--schedule-dir", help="directory with male.json/female.json")
    parser.add_argument("--json", action="store_true", help="machine-readable output")


def _add_explainer_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--order",
        help="comma-separated feature iteration order "
        "(default: sex,age,hdl,total_chol,sbp,treatment,smoker,diabetic)",
    )
    parser.add_argument(
        "--target",
        choices=["next-lower", "low", "moderate"],
        default="next-lower",
        help="counterfactual target category",
    )
    parser.add_argument(
        "--mutability",
        choices=["default", "age-sex-only"],
        default="default",
        help="which features a counterfactual may change",
    )


def _profile_from_args(args: argparse.Namespace) -> PatientProfile:
    return PatientProfile(
        sex=Sex(args.sex),
        age=args.age,
        hdl=args.hdl,
        total_chol=args.total_chol,
        sbp=args.sbp,
        treated_sbp=args.treated,
        smoker=args.smoker,
        diabetic=args.diabetic,
    )


def _parse_order(text: str | None) -> tuple[FeatureId, ...] | None:
    if not text:
        return None
    try:
        return tuple(FeatureId(name.strip()) for name in text.split(","))
    except ValueError as exc:
        known = ", ".join(f.value for f in FeatureId)
        raise DomainError(f"bad --order ({exc}); known features: {known}") from None


def _parse_target(name: str, category: RiskCategory) -> CategoryPredicate | None:
    if name == "next-lower":
        return None  # explainer default
    return CategoryPredicate.equals(RiskCategory[name.upper()])


def _parse_policy(name: str) -> MutabilityPolicy:
    return DEFAULT_POLICY if name == "default" else AGE_SEX_ONLY_POLICY


def _load(args: argparse.Namespace) -> ScheduleSet:
    return load_schedule_dir(resolve_schedule_dir(args.schedule_dir))


def cmd_score(args: argparse.Namespace) -> int:
    schedules = _load(args)
    profile = _profile_from_args(args)
    if args.json:
        engine = LogicEngine(schedules)
        print(json.dumps(assessment_payload(engine, profile), indent=2))
        return EXIT_OK
    breakdown, rp, category = assess(schedules, profile)
    for name, pts in breakdown.as_dict().items():
        if name != "total":
            print(f"  {name}: {pts:+d}")
    print(f"total: {breakdown.total}, risk: {rp}%, category: {category.name}")
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    schedules = _load(args)
    profile = _profile_from_args(args)
    engine = LogicEngine(schedules)
    order = _parse_order(args.order)
    policy = _parse_policy(args.mutability)
    breakdown, rp, category = assess(schedules, profile)
    target = _parse_target(args.target, category)

    if args.json:
        payload = assessment_payload(engine, profile, order, policy, target)
        print(json.dumps(payload, indent=2))
        return EXIT_UNREACHABLE if payload["counterfactual"]["status"] == "unreachable" else EXIT_OK

    print(f"total: {breakdown.total}, risk: {rp}%, category: {category.name}")
    abduction = abduce(engine, profile, order)
    drivers = ", ".join(DISPLAY_NAMES[f] for f in abduction.sorted_features())
    print(f"abductive explanation: {drivers}")

    cf = counterfactual_payload(engine, profile, target, policy, order)
    if cf["status"] == "already_at_target":
        print("counterfactual: no counterfactual needed (already at target)")
        return EXIT_OK
    if cf["status"] == "unreachable":
        print("counterfactual: target unreachable given immutable features")
        return EXIT_UNREACHABLE
    print(f"counterfactual (reach {cf['target']}):")
    for name, change in cf["changes"].items():
        label = DISPLAY_NAMES[FeatureId(name)]
        print(f"  change {label}: {change['from']} -> {change['to']}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    schedule_dir = resolve_schedule_dir(args.schedule_dir)
    sexes = tuple(Sex) if args.sex == "both" else (Sex(args.sex),)
    for sex in sexes:
        path = schedule_dir / f"{sex.value}.json"
        if not path.exists():
            print(f"error: missing schedule file {path}", file=sys.stderr)
            return EXIT_USAGE
    schedules = load_schedule_dir(schedule_dir)
    engine = LogicEngine(schedules)
    grid = generate_grid(GridSpec(engine.domains, sexes))
    out_dir = Path(args.out) if args.out else Path("sweep-output")
    report, records_path, text_path, json_path = run_sweep_to_files(
        engine,
        out_dir,
        grid=grid,
        order=_parse_order(args.order),
        policy=_parse_policy(args.mutability),
        target_rule=None if args.target == "next-lower" else (
            lambda _cat, _t=args.target: CategoryPredicate.equals(RiskCategory[_t.upper()])
        ),
    )
    if args.json:
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        print(format_report(report))
    print(f"records: {records_path}")
    print(f"report: {text_path}, {json_path}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(resolve_schedule_dir(args.schedule_dir))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frs-explain",
        description="Score cardiovascular risk and explain the category.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score one profile")
    _add_profile_args(p_score)
    _add_common_args(p_score)
    p_score.set_defaults(func=cmd_score)

    p_explain = sub.add_parser("explain", help="score plus explanations")
    _add_profile_args(p_explain)
    _add_explainer_args(p_explain)
    _add_common_args(p_explain)
    p_explain.set_defaults(func=cmd_explain)

    p_sweep = sub.add_parser("sweep", help="sweep the exhaustive input grid")
    p_sweep.add_argument("--sex", choices=["male", "female", "both"], default="both")
    p_sweep.add_argument("--out", help="output directory (default: sweep-output)")
    _add_explainer_args(p_sweep)
    _add_common_args(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--schedule-dir")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ScheduleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AlreadyAtTarget as exc:
        print(f"no counterfactual needed: {exc}", file=sys.stderr)
        return EXIT_OK
    except UnreachableTarget as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE


if __name__ == "__main__":
    sys.exit(main())
