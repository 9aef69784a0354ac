import json
import math

import pytest
from fastapi.testclient import TestClient

from sobolev_lab import __version__
from sobolev_lab.service.app import app

from .oracles import DISK_C22


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health_and_version(client):
    assert client.get("/health").json() == {"status": "ok"}
    assert client.get("/version").json() == {"version": __version__}


def test_solve_fem_endpoint(client):
    resp = client.post(
        "/solve",
        json={
            "domain": {"kind": "disk", "R": 1.0},
            "exponents": {"n": 2, "p": 2, "r": 2},
            "h": 0.05,
        },
    )
    assert resp.status_code == 200
    data = resp.json()
    assert data["header"]["version"] == __version__
    assert data["header"]["command"] == "solve"
    assert data["header"]["config"]["h"] == 0.05
    assert "timestamp" in data["header"]
    body = data["body"]
    assert body["method"] == "fem"
    assert body["C"] == pytest.approx(DISK_C22, rel=0.01)
    assert body["passed"] is True
    assert body["mesh_text"].splitlines()[0].split()[0] == str(body["n_nodes"])
    assert len(body["values"]) == body["n_nodes"]


def test_solve_radial_endpoint(client):
    resp = client.post(
        "/solve",
        json={
            "domain": {"kind": "ball", "dim": 3, "R": 1.0},
            "exponents": {"n": 3, "p": 2, "r": 2},
        },
    )
    assert resp.status_code == 200
    body = resp.json()["body"]
    assert body["method"] == "radial"
    assert body["C"] == pytest.approx(math.pi**2, rel=1e-4)
    assert len(body["profile"]["v"]) == len(body["profile"]["psi_star"])


def test_verify_endpoint_disk_equalities(client):
    resp = client.post(
        "/verify",
        json={
            "domain": {"kind": "disk"},
            "exponents": {"n": 2, "p": 2, "r": 2},
            "h": 0.03,
        },
    )
    assert resp.status_code == 200
    body = resp.json()["body"]
    assert body["passed"] is True
    names = {r["name"] for r in body["reports"]}
    assert names == {"pp_general", "two_dim_8pi"}
    assert all(r["equality"] for r in body["reports"])  # disk: equality cases


def test_rearrange_endpoint(client):
    resp = client.post(
        "/rearrange",
        json={
            "domain": {"kind": "square", "side": 1.0},
            "exponents": {"n": 2, "p": 2, "r": 2},
            "h": 0.04,
            "k": 150,
        },
    )
    assert resp.status_code == 200
    body = resp.json()["body"]
    assert body["talenti"]["passed"] is True
    assert body["crossings"]["power_matched"]["count"] == 1
    assert body["crossings"]["sup_matched"]["pattern"] == "phi_dominates"
    assert body["passed"] is True


def test_derivative_endpoint(client):
    resp = client.post(
        "/derivative",
        json={
            "domain": {"kind": "disk"},
            "exponents": {"n": 2, "p": 2, "r": 2},
            "h": 0.03,
            "speed": {"law": "uniform", "speed": 1.0},
            "delta": 0.002,
        },
    )
    assert resp.status_code == 200
    body = resp.json()["body"]
    assert body["mismatch"] <= 0.03
    assert body["passed"] is True
    assert body["c_dot_formula"] == pytest.approx(-2 * DISK_C22, rel=0.05)


def test_flow_endpoint_hele_shaw(client):
    resp = client.post(
        "/flow",
        json={
            "domain": {"kind": "disk"},
            "exponents": {"n": 2, "p": 2, "r": 2},
            "h": 0.04,
            "law": {"law": "hele_shaw", "pole": [0.0, 0.0]},
            "dt": 0.05,
            "steps": 3,
            "monitor": "thm2",
            "tolerance": 0.05,
        },
    )
    assert resp.status_code == 200
    body = resp.json()["body"]
    assert body["C_strictly_decreasing"] is True
    assert body["area_rate_ok"] is True
    assert body["passed"] is True
    assert len(body["monitors"]) == 4
    assert body["csv"][0] == "k,t,area,perimeter,C,lhs,rhs,slack"


def test_conformal_endpoint(client):
    resp = client.post(
        "/conformal",
        json={
            "chain": [{"type": "translate", "b": [3.0, 0.0, 0.0]}, {"type": "invert"}],
            "exponents": {"n": 3, "p": 2, "r": 2},
            "t_count": 10,
        },
    )
    assert resp.status_code == 200
    body = resp.json()["body"]
    assert body["monotone_everywhere"] is True
    assert body["sphere_residual"] < 1e-10
    assert body["passed"] is True


def test_validation_errors(client):
    # pydantic-level: bad exponent
    resp = client.post("/solve", json={"exponents": {"n": 2, "p": 0.0, "r": 2}})
    assert resp.status_code == 422
    # domain-level: conformal with a singular chain
    resp = client.post(
        "/conformal",
        json={
            "chain": [{"type": "invert"}],
            "exponents": {"n": 3, "p": 2, "r": 2},
        },
    )
    assert resp.status_code == 422
    # mesh-level: h too coarse
    resp = client.post("/solve", json={"domain": {"kind": "disk"}, "h": 0.5})
    assert resp.status_code == 422


def test_body_determinism(client):
    payload = {
        "domain": {"kind": "star", "rho": "1+0.2*cos(3*theta)"},
        "exponents": {"n": 2, "p": 2, "r": 2},
        "h": 0.05,
    }
    b1 = client.post("/solve", json=payload).json()["body"]
    b2 = client.post("/solve", json=payload).json()["body"]
    assert json.dumps(b1, sort_keys=True) == json.dumps(b2, sort_keys=True)
