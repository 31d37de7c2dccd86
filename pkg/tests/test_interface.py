"""CLI and HTTP service: formats, status codes, and CLI/HTTP value identity."""

import json

import pytest
from fastapi.testclient import TestClient

from frs_explain.cli import main
from frs_explain.service import create_app

WORKED_EXAMPLE_FLAGS = [
    "--sex", "male", "--age", "70", "--hdl", "30", "--total-chol", "283",
    "--sbp", "170", "--diabetic",
]
ZERO_POINT_FLAGS = [
    "--sex", "male", "--age", "30", "--hdl", "45", "--total-chol", "150",
    "--sbp", "125",
]
WORKED_EXAMPLE_BODY = {
    "sex": "male", "age": 70, "hdl": 30, "total_chol": 283, "sbp": 170,
    "treated_sbp": False, "smoker": False, "diabetic": True,
}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestCliScore:
    def test_worked_example_output(self, capsys):
        assert main(["score", *WORKED_EXAMPLE_FLAGS]) == 0
        out = capsys.readouterr().out
        assert "total: 26, risk: >30%, category: HIGH" in out

    def test_zero_point_output(self, capsys):
        assert main(["score", *ZERO_POINT_FLAGS]) == 0
        out = capsys.readouterr().out
        assert "total: 0, risk: 1.6%, category: LOW" in out

    def test_age_below_domain_is_usage_error(self, capsys):
        code = main(["score", "--sex", "male", "--age", "20", "--hdl", "45",
                     "--total-chol", "150", "--sbp", "125"])
        assert code == 2
        assert "age" in capsys.readouterr().err

    def test_missing_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["score", "--sex", "male", "--age", "40"])
        assert exc.value.code == 2


class TestCliExplain:
    def test_worked_example_names_drivers(self, capsys):
        assert main(["explain", *WORKED_EXAMPLE_FLAGS]) == 0
        out = capsys.readouterr().out
        assert "age, systolic blood pressure, diabetes" in out

    def test_low_profile_needs_no_counterfactual(self, capsys):
        assert main(["explain", *ZERO_POINT_FLAGS]) == 0
        assert "no counterfactual needed" in capsys.readouterr().out

    def test_unreachable_target_is_distinct_status(self, capsys):
        code = main(["explain", "--sex", "male", "--age", "75", "--hdl", "50",
                     "--total-chol", "180", "--sbp", "120", "--diabetic",
                     "--target", "low"])
        assert code == 3
        assert "unreachable" in capsys.readouterr().out

    def test_json_round_trips(self, capsys):
        assert main(["explain", *WORKED_EXAMPLE_FLAGS, "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["category"] == "high"
        assert payload["risk_percent"] == "gt30"
        assert payload["abductive"] == ["age", "sbp", "diabetic"]
        assert payload["counterfactual"]["status"] == "ok"
        assert json.loads(json.dumps(payload)) == payload

    def test_custom_order_flag(self, capsys):
        assert main(["explain", *WORKED_EXAMPLE_FLAGS, "--json", "--order",
                     "diabetic,smoker,treatment,sbp,total_chol,hdl,age,sex"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["category"] == "high"

    def test_bad_order_flag(self, capsys):
        assert main(["explain", *WORKED_EXAMPLE_FLAGS, "--order", "bogus"]) == 2
        assert "--order" in capsys.readouterr().err


class TestCliSweep:
    def test_male_sweep_writes_files(self, tmp_path, capsys):
        out_dir = tmp_path / "out"
        assert main(["sweep", "--sex", "male", "--out", str(out_dir)]) == 0
        out = capsys.readouterr().out
        assert "10000 instances" in out
        csv_lines = (out_dir / "records.csv").read_text().splitlines()
        assert len(csv_lines) == 10_001  # header + one row per instance
        report = json.loads((out_dir / "report.json").read_text())
        sparsity = report["abductive"]["sparsity"]
        assert sum(cell["percent"] for cell in sparsity.values()) == pytest.approx(100, abs=0.05)

    def test_missing_female_schedule_named(self, tmp_path, capsys):
        schedule_dir = tmp_path / "schedules"
        schedule_dir.mkdir()
        from frs_explain.core import bundled_schedule_dir

        (schedule_dir / "male.json").write_text(
            (bundled_schedule_dir() / "male.json").read_text()
        )
        code = main(["sweep", "--schedule-dir", str(schedule_dir),
                     "--out", str(tmp_path / "out")])
        assert code == 2
        assert "female.json" in capsys.readouterr().err


class TestService:
    def test_health(self, client):
        response = client.get("/api/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_score_worked_example(self, client):
        response = client.post("/api/score", json=WORKED_EXAMPLE_BODY)
        assert response.status_code == 200
        payload = response.json()
        assert payload["category"] == "high"
        assert payload["breakdown"]["total"] == 26
        assert payload["risk_percent"] == "gt30"
        assert payload["abductive"] == ["age", "sbp", "diabetic"]

    def test_whatif_lowers_total(self, client):
        response = client.post(
            "/api/whatif",
            json={"profile": WORKED_EXAMPLE_BODY, "overrides": {"sbp": 115}},
        )
        assert response.status_code == 200
        payload = response.json()
        assert payload["breakdown"]["total"] == 21
        assert payload["profile"]["sbp"] == 115
        assert payload["overrides"] == {"sbp": 115}

    def test_whatif_rejects_immutable_override(self, client):
        response = client.post(
            "/api/whatif",
            json={"profile": WORKED_EXAMPLE_BODY, "overrides": {"age": 40}},
        )
        assert response.status_code == 400
        assert "modifiable" in response.text

    def test_counterfactual_endpoint(self, client):
        response = client.post("/api/counterfactual", json={"profile": WORKED_EXAMPLE_BODY})
        assert response.status_code == 200
        payload = response.json()
        assert payload["status"] == "ok"
        assert payload["changed"]
        assert payload["witness"]["sex"] == "male"

    def test_counterfactual_unreachable_is_422(self, client):
        body = dict(WORKED_EXAMPLE_BODY, age=75, sbp=120, hdl=50, total_chol=180)
        response = client.post(
            "/api/counterfactual", json={"profile": body, "target": "low"}
        )
        assert response.status_code == 422
        assert "unreachable" in response.json()["detail"]

    def test_schema_lists_ten_age_bins(self, client):
        schema = client.get("/api/schema").json()
        assert len(schema["features"]["male"]["age"]["bins"]) == 10
        assert len(schema["features"]["female"]["sbp"]["values"]) == 6
        assert schema["categories"]["low_max_percent"] == 6
        assert "sex" in schema["immutable"] and "age" in schema["immutable"]

    def test_invalid_profile_is_400_with_fields(self, client):
        response = client.post("/api/score", json=dict(WORKED_EXAMPLE_BODY, age="old"))
        assert response.status_code == 400
        errors = response.json()["errors"]
        assert any(err["field"] == "age" for err in errors)

    def test_out_of_domain_profile_is_400(self, client):
        response = client.post("/api/score", json=dict(WORKED_EXAMPLE_BODY, age=20))
        assert response.status_code == 400

    def test_unknown_route_is_404(self, client):
        assert client.get("/api/nope").status_code == 404


class TestCliHttpIdentity:
    def test_score_payloads_match(self, client, capsys):
        assert main(["score", *WORKED_EXAMPLE_FLAGS, "--json"]) == 0
        cli_payload = json.loads(capsys.readouterr().out)
        http_payload = client.post("/api/score", json=WORKED_EXAMPLE_BODY).json()
        assert cli_payload == http_payload

    def test_explain_matches_score_for_same_profile(self, client, capsys):
        assert main(["explain", *WORKED_EXAMPLE_FLAGS, "--json"]) == 0
        cli_payload = json.loads(capsys.readouterr().out)
        http_payload = client.post("/api/score", json=WORKED_EXAMPLE_BODY).json()
        assert cli_payload == http_payload
