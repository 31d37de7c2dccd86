"""Stateless HTTP service exposing scoring, what-if and counterfactuals.

Schedules load once at startup; every handler is a pure function over that
immutable state, so concurrent requests cannot interfere. Invalid profiles
come back as 400 with field-level messages; an unreachable counterfactual
target is 422.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .assessment import assessment_payload, counterfactual_payload, profile_payload
from .core import (
    DISPLAY_NAMES,
    DomainError,
    FeatureId,
    PatientProfile,
    RiskCategory,
    ScheduleSet,
    Sex,
    bundled_schedule_dir,
    load_schedule_dir,
)
from .engine import CategoryPredicate, LogicEngine
from .explain import DEFAULT_POLICY, AGE_SEX_ONLY_POLICY, UnreachableTarget


class ProfileBody(BaseModel):
    sex: Literal["male", "female"]
    age: int
    hdl: int
    total_chol: int
    sbp: int
    treated_sbp: bool = False
    smoker: bool = False
    diabetic: bool = False

    def to_profile(self) -> PatientProfile:
        return PatientProfile(
            sex=Sex(self.sex),
            age=self.age,
            hdl=self.hdl,
            total_chol=self.total_chol,
            sbp=self.sbp,
            treated_sbp=self.treated_sbp,
            smoker=self.smoker,
            diabetic=self.diabetic,
        )


class WhatIfBody(BaseModel):
    profile: ProfileBody
    overrides: dict[str, int | bool] = Field(default_factory=dict)


class CounterfactualBody(BaseModel):
    profile: ProfileBody
    target: Literal["next-lower", "low", "moderate"] = "next-lower"
    mutability: Literal["default", "age-sex-only"] = "default"


def _schema_payload(schedules: ScheduleSet, engine: LogicEngine) -> dict:
    features: dict[str, dict] = {}
    for sex in schedules.sexes:
        per_sex = schedules.for_sex(sex)
        domain = engine.domains.for_sex(sex)
        features[sex.value] = {
            "age": _bin_block(per_sex.age_bins, domain.age),
            "hdl": _bin_block(per_sex.hdl_bins, domain.hdl),
            "total_chol": _bin_block(per_sex.total_chol_bins, domain.total_chol),
            "sbp": {
                "untreated": _bin_block(per_sex.sbp_untreated_bins, domain.sbp),
                "treated": _bin_block(per_sex.sbp_treated_bins, domain.sbp),
                "values": list(domain.sbp),
            },
            "treatment": {"selects_sbp_column": True},
            "smoker": {"points_true": per_sex.smoker_points},
            "diabetic": {"points_true": per_sex.diabetic_points},
        }
    return {
        "sexes": [s.value for s in schedules.sexes],
        "features": features,
        "categories": {
            "low_max_percent": schedules.low_max_percent,
            "high_min_percent": schedules.high_min_percent,
            "order": [c.label for c in RiskCategory],
        },
        "immutable": [f.value for f in FeatureId if f not in DEFAULT_POLICY.mutable],
        "mutable": [f.value for f in FeatureId if f in DEFAULT_POLICY.mutable],
        "display_names": {f.value: DISPLAY_NAMES[f] for f in FeatureId},
    }


def _bin_block(bins, values) -> dict:
    return {
        "bins": [
            {"min": b.min, "max": b.max, "points": b.points, "label": b.label}
            for b in bins
        ],
        "values": list(values),
    }


def create_app(schedule_dir: str | Path | None = None, static_dir: str | Path | None = None) -> FastAPI:
    """Build the service with schedules loaded once."""
    schedules = load_schedule_dir(schedule_dir or bundled_schedule_dir())
    engine = LogicEngine(schedules)
    schema = _schema_payload(schedules, engine)

    app = FastAPI(title="frs-explain", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_request: Request, exc: RequestValidationError):
        errors = [
            {
                "field": ".".join(str(part) for part in err.get("loc", []) if part != "body"),
                "message": err.get("msg", "invalid value"),
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.exception_handler(DomainError)
    async def on_domain_error(_request: Request, exc: DomainError):
        return JSONResponse(status_code=400, content={"errors": [{"field": "", "message": str(exc)}]})

    @app.exception_handler(UnreachableTarget)
    async def on_unreachable(_request: Request, exc: UnreachableTarget):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/api/schema")
    def get_schema() -> dict:
        return schema

    @app.post("/api/score")
    def score(body: ProfileBody) -> dict:
        return assessment_payload(engine, body.to_profile())

    @app.post("/api/whatif")
    def whatif(body: WhatIfBody) -> dict:
        base = body.profile.to_profile()
        values = {}
        for name, value in body.overrides.items():
            try:
                feature = FeatureId(name)
            except ValueError:
                raise DomainError(f"unknown override feature {name!r}")
            if feature not in DEFAULT_POLICY.mutable:
                raise DomainError(f"feature {name!r} is not modifiable")
            values[feature] = value
        overridden = base.with_values(values)
        payload = assessment_payload(engine, overridden)
        payload["base_profile"] = profile_payload(base)
        payload["overrides"] = {f.value: v for f, v in values.items()}
        return payload

    @app.post("/api/counterfactual")
    def counterfactual(body: CounterfactualBody) -> dict:
        profile = body.profile.to_profile()
        target = (
            None
            if body.target == "next-lower"
            else CategoryPredicate.equals(RiskCategory[body.target.upper()])
        )
        policy = DEFAULT_POLICY if body.mutability == "default" else AGE_SEX_ONLY_POLICY
        result = counterfactual_payload(engine, profile, target, policy)
        if result["status"] == "unreachable":
            raise UnreachableTarget(result["detail"])
        return result

    if static_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = candidate if candidate.is_dir() else None
    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
