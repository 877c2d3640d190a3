"""HTTP surface: every verb endpoint, error mapping, artifact payloads."""

import pytest
from fastapi.testclient import TestClient

from wgbounds.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


SMALL = {
    "geometry": {"d": 1.0},
    "potential": {"family": "gaussian", "params": {"A": 2.0, "sigma": 1.0}, "alphas": [1.0, 2.0]},
    "grid": {"S": 8.0, "nx": 129, "ny": 9, "levels": 1},
    "gap_trials": 10,
}


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok" and body["version"]


def test_solve_endpoint(client):
    resp = client.post("/solve", json={"config": SMALL})
    assert resp.status_code == 200
    body = resp.json()
    assert body["verb"] == "solve"
    assert len(body["config_hash"]) == 12
    assert "spectral.csv" in body["files"]
    assert body["summary"]["monotone_counts"] is True


def test_validate_endpoint_reports_failed_checks(client):
    bad = {"geometry": {"d": 1.0, "curvature": {"family": "constant",
                                                "params": {"value": 1.0, "s_max": 2.0}}}}
    resp = client.post("/validate", json={"config": bad})
    assert resp.status_code == 200
    assert resp.json()["summary"]["valid"] is False


def test_solve_rejects_inadmissible_geometry(client):
    bad = dict(SMALL)
    bad["geometry"] = {"d": 1.0, "curvature": {"family": "constant",
                                               "params": {"value": 1.0, "s_max": 2.0}}}
    resp = client.post("/solve", json={"config": bad})
    assert resp.status_code == 400
    body = resp.json()
    assert body["kind"] == "validation"
    assert "k+" in body["message"] or "k" in body["message"]


def test_unknown_family_maps_to_validation_error(client):
    resp = client.post("/solve", json={"config": {"potential": {"family": "quartic_nonsense"}}})
    assert resp.status_code == 400
    body = resp.json()
    assert body["kind"] == "validation"
    assert "quartic_nonsense" in body["message"]


def test_bounds_endpoint(client):
    resp = client.post("/bounds", json={"config": SMALL})
    assert resp.status_code == 200
    body = resp.json()
    assert "bounds.csv" in body["files"]
    assert all(rhs >= 1.0 for rhs in body["summary"]["straight_rhs"])


def test_calibrate_then_verify_roundtrip(client):
    cfg = dict(SMALL)
    cfg["potential"] = {"family": "gaussian", "params": {"A": 2.0, "sigma": 1.0},
                        "alphas": [1.0, 2.0, 4.0]}
    resp = client.post("/calibrate", json={"config": cfg})
    assert resp.status_code == 200
    constants = resp.json()["summary"]["constants"]

    cfg2 = dict(cfg)
    cfg2["constants"] = {"mode": "fixed", "values": constants}
    resp2 = client.post("/verify", json={"config": cfg2})
    assert resp2.status_code == 200
    summary = resp2.json()["summary"]
    assert summary["dominance_ok"] and summary["gap_ok"] and summary["ok"]


def test_seed_and_threads_overrides(client):
    resp = client.post("/verify", json={"config": SMALL, "seed": 3, "threads": 2})
    assert resp.status_code == 200
    assert resp.json()["summary"]["gap_trials"] == 10


def test_nonconvergence_maps_to_502(client, monkeypatch):
    import wgbounds.experiments as exp
    from wgbounds.errors import EigensolverNonconvergenceError

    def boom(*args, **kwargs):
        raise EigensolverNonconvergenceError("synthetic")

    monkeypatch.setattr(exp, "solve_straight", boom)
    resp = client.post("/solve", json={"config": SMALL})
    assert resp.status_code == 502
    body = resp.json()
    assert body["kind"] == "nonconvergence"
    assert "FAILED" in body["files"]["spectral.csv"]
