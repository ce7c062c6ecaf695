"""
Tests for the HTTP API: stored decompositions and Monte Carlo reports.
"""

from io import BytesIO

import pandas as pd
import pytest

from app import app
from models import ToneParams
from signal_model.signal_model_service import SignalModelService


@pytest.fixture
def client():
    app.config["TESTING"] = True
    with app.test_client() as client:
        yield client


@pytest.fixture
def samples():
    n = 512
    tones = [ToneParams.at_bin(30.4, n, 1.0, 0.5), ToneParams.at_bin(90.8, n, 0.5, -0.5)]
    return SignalModelService().synthesize(tones, n).samples.tolist()


class TestDecompositionRoutes:
    """CRUD on /decompositions."""

    def test_create_get_delete(self, client, samples):
        resp = client.post("/decompositions", json={"samples": samples, "tones": 2, "sample_rate": 512, "source": "unit"})
        assert resp.status_code == 201
        doc = resp.get_json()
        assert len(doc["tones"]) == 2
        assert doc["tones"][0]["frequency_hz"] == pytest.approx(30.4, abs=0.05)
        run_id = doc["id"]

        listed = client.get("/decompositions").get_json()
        assert run_id in [r["id"] for r in listed]
        assert next(r for r in listed if r["id"] == run_id)["tone_count"] == 2

        stored = client.get(f"/decompositions/{run_id}").get_json()
        assert stored["mode"] == "known"
        assert [t["position"] for t in stored["tones"]] == [0, 1]
        assert stored["tones"][0]["frequency_rad_per_sample"] == doc["tones"][0]["frequency_rad_per_sample"]
        assert len(stored["diagnostics"]) == 2

        assert client.delete(f"/decompositions/{run_id}").status_code == 204
        assert client.get(f"/decompositions/{run_id}").status_code == 404
        assert client.delete(f"/decompositions/{run_id}").status_code == 404

    def test_blind_without_storing(self, client, samples):
        resp = client.post("/decompositions", json={"samples": samples, "mode": "blind", "residual_threshold": 1e-3, "store": False})
        assert resp.status_code == 200
        doc = resp.get_json()
        assert "id" not in doc
        assert len(doc["tones"]) == 2
        assert doc["stop_reason"] == "residual_below_threshold"

    @pytest.mark.parametrize("body", [
        {},
        {"samples": "not a list", "tones": 1},
        {"samples": [1.0], "tones": 1},
        {"samples": [0.0, 1.0, 0.0, -1.0], "tones": 3},
        {"samples": [0.0, 1.0, 0.0, -1.0, 0.0], "mode": "psychic"},
        {"samples": [0.0, 1.0, 0.0, -1.0, 0.0], "mode": "known"},
        {"samples": [0.0, 1.0, 0.0, -1.0, 0.0], "tones": 1, "epsilon": 5},
        {"samples": [0.0, 1.0, 0.0, -1.0, 0.0], "tones": 1, "sample_rate": -1},
        {"samples": [0.0, 1.0, 0.0, -1.0, 0.0], "tones": 1, "store": "false"},
        {"samples": [0.0, 1.0, 0.0, -1.0, 0.0], "tones": 1, "store": 0},
    ])
    def test_bad_requests(self, client, body):
        assert client.post("/decompositions", json=body).status_code == 400

    def test_unknown_run(self, client):
        assert client.get("/decompositions/999999").status_code == 404


class TestMonteCarloRoute:
    """POST /bench/monte-carlo."""

    BODY = {
        "truth": [{"frequency": 0.5, "amplitude": 1.0, "phase": 0.2}, {"frequency": 1.4, "amplitude": 0.5}],
        "n_samples": 256,
        "snr_db": 20,
        "trials": 4,
        "tones": 2,
        "seed": 1,
    }

    def test_json(self, client):
        resp = client.post("/bench/monte-carlo", json=self.BODY)
        assert resp.status_code == 200
        doc = resp.get_json()
        assert doc["trials"] == 4
        assert len(doc["per_trial"]) == 4
        assert doc["detection_successes"] <= 4

    def test_csv(self, client):
        resp = client.post("/bench/monte-carlo?fmt=csv", json=self.BODY)
        assert resp.status_code == 200
        assert resp.headers["Content-Type"].startswith("text/csv")
        assert resp.data.decode().splitlines()[0].startswith("trial,seed")

    def test_xlsx(self, client):
        resp = client.post("/bench/monte-carlo?fmt=xlsx", json=self.BODY)
        assert resp.status_code == 200
        sheets = pd.read_excel(BytesIO(resp.data), sheet_name=None)
        assert len(sheets["trials"]) == 4

    @pytest.mark.parametrize("query,body", [
        ("?fmt=pdf", BODY),
        ("", {**BODY, "truth": []}),
        ("", {**BODY, "truth": [{"frequency": 4.0, "amplitude": 1.0}]}),
        ("", {**BODY, "trials": 0}),
    ])
    def test_bad_requests(self, client, query, body):
        assert client.post(f"/bench/monte-carlo{query}", json=body).status_code == 400
