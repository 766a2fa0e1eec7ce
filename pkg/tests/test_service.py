import numpy as np
import pytest

pytest.importorskip("fastapi")
from fastapi.testclient import TestClient

from counselor import pipeline
from counselor.config import load_config
from counselor.service import create_app


@pytest.fixture(scope="module")
def client(synth_dataset):
    cfg = load_config(path=synth_dataset["config"], env={})
    prepared = pipeline.prepare(cfg)
    app = create_app(prepared)
    return TestClient(app, raise_server_exceptions=False)


class TestStocks:
    def test_lists_universe_and_fingerprint(self, client):
        r = client.get("/v1/stocks")
        assert r.status_code == 200
        body = r.json()
        assert body["stocks"] == ["AAA", "BBB", "CCC", "NOF"]
        assert body["fic_stocks"] == ["AAA", "BBB", "CCC"]
        assert len(body["fingerprint"]) == 12
        assert body["decision_days"]["first"] < body["decision_days"]["last"]


class TestForecast:
    def test_series_payload(self, client):
        r = client.get("/v1/forecast", params={"symbol": "AAA"})
        assert r.status_code == 200
        body = r.json()
        assert len(body["days"]) == len(body["predicted"]) == len(body["actual"])
        assert len(body["days"]) > 10

    def test_range_filter(self, client):
        full = client.get("/v1/forecast", params={"symbol": "AAA"}).json()
        partial = client.get(
            "/v1/forecast", params={"symbol": "AAA", "start": full["days"][5]}
        ).json()
        assert partial["days"][0] == full["days"][5]
        assert len(partial["days"]) == len(full["days"]) - 5

    def test_unknown_symbol_404(self, client):
        r = client.get("/v1/forecast", params={"symbol": "NOPE"})
        assert r.status_code == 404


class TestFrontier:
    def test_points_ordered_and_risk_monotone(self, client):
        r = client.get("/v1/frontier")
        assert r.status_code == 200
        body = r.json()
        risks = [p["risk"] for p in body["points"]]
        assert all(b >= a - 1e-9 for a, b in zip(risks, risks[1:]))
        assert body["risk_min"] == pytest.approx(min(risks))
        assert body["risk_max"] == pytest.approx(max(risks))
        for p in body["points"]:
            w = list(p["weights"].values())
            assert sum(w) == pytest.approx(1.0, abs=1e-6)

    def test_date_out_of_range_422(self, client):
        r = client.get("/v1/frontier", params={"date": "2016-01-05"})
        assert r.status_code == 422

    def test_malformed_date_400(self, client):
        r = client.get("/v1/frontier", params={"date": "not-a-date"})
        assert r.status_code == 400


class TestRecommend:
    def test_eta_zero_is_minimum_risk_point(self, client):
        frontier = client.get("/v1/frontier").json()
        rec = client.get("/v1/recommend", params={"eta": 0.0}).json()
        assert rec["risk"] == pytest.approx(frontier["risk_min"])

    def test_eta_one_is_max_return_point(self, client):
        frontier = client.get("/v1/frontier").json()
        rec = client.get("/v1/recommend", params={"eta": 1.0}).json()
        best = max(p["expected_return"] for p in frontier["points"])
        assert rec["expected_return"] == pytest.approx(best)

    def test_fic_method_includes_audit(self, client):
        rec = client.get("/v1/recommend", params={"method": "fic"}).json()
        assert set(rec["weights"]) == {"AAA", "BBB", "CCC"}
        assert sum(rec["weights"].values()) == pytest.approx(1.0, abs=1e-6)
        assert len(rec["audit"]["alpha"]) == 3

    def test_bad_method_400(self, client):
        assert client.get("/v1/recommend", params={"method": "astrology"}).status_code == 400

    def test_bad_eta_400(self, client):
        assert client.get("/v1/recommend", params={"eta": 2.0}).status_code == 400
        assert client.get("/v1/recommend", params={"eta": "abc"}).status_code == 400


class TestBacktestEndpoint:
    def test_runs_and_matches_core(self, client, synth_dataset):
        r = client.get(
            "/v1/backtest",
            params={"method": "random", "days": 5, "eta": 0.3, "seed": 11},
        )
        assert r.status_code == 200
        body = r.json()
        assert len(body["budget"]) == 5
        # identical query is deterministic
        again = client.get(
            "/v1/backtest",
            params={"method": "random", "days": 5, "eta": 0.3, "seed": 11},
        ).json()
        assert again["budget"] == body["budget"]
        assert again["fingerprint"] == body["fingerprint"]

    def test_invested_flag_consistent(self, client):
        body = client.get(
            "/v1/backtest", params={"method": "portfolio", "days": 6}
        ).json()
        for invested, expected in zip(body["invested"], body["expected_return"]):
            assert invested == (expected >= 0)

    def test_bad_days_400(self, client):
        assert client.get("/v1/backtest", params={"days": 0}).status_code == 400
        assert client.get("/v1/backtest", params={"days": "soon"}).status_code == 400


class TestCliHttpConsistency:
    def test_recommend_weights_identical_across_surfaces(
        self, client, synth_dataset, capsys
    ):
        # single shared core: the CLI and the HTTP endpoint answer the
        # same query with the same numbers, modulo formatting
        from counselor.cli import main

        body = client.get(
            "/v1/recommend", params={"method": "portfolio", "eta": 0.3}
        ).json()
        code = main(
            [
                "--config", str(synth_dataset["config"]),
                "recommend", "--method", "portfolio", "--date", body["date"],
            ]
        )
        assert code == 0
        lines = [
            l
            for l in capsys.readouterr().out.strip().splitlines()
            if not l.startswith("#") and not l.startswith("symbol")
        ]
        cli_weights = {l.split(",")[0]: float(l.split(",")[1]) for l in lines}
        for sym, w in body["weights"].items():
            assert cli_weights[sym] == pytest.approx(w, abs=1e-7)


class TestTimeoutContract:
    def test_overrunning_request_returns_503_with_retry_hint(self, synth_dataset):
        from counselor import pipeline as pl
        from counselor.config import load_config, with_overrides

        cfg = load_config(path=synth_dataset["config"], env={})
        prepared = pl.prepare(with_overrides(cfg, request_timeout=1e-9))
        slow = TestClient(create_app(prepared), raise_server_exceptions=False)
        r = slow.get("/v1/backtest", params={"method": "random", "days": 3})
        assert r.status_code == 503
        assert "Retry-After" in r.headers


class TestInternalFault:
    def test_unexpected_error_returns_opaque_id(self, synth_dataset):
        cfg = load_config(path=synth_dataset["config"], env={})
        prepared = pipeline.prepare(cfg)
        app = create_app(prepared)
        # sabotage an internal structure to force a genuine fault
        prepared.forecasts["AAA"] = None
        broken = TestClient(app, raise_server_exceptions=False)
        r = broken.get("/v1/forecast", params={"symbol": "AAA"})
        assert r.status_code == 500
        assert "id" in r.json()
