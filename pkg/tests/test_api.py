import inspect

import pytest
from fastapi.testclient import TestClient

from app.api.residue_routes import router
from main import app
from tests.conftest import (
    EXCEPTIONAL_PROBLEM,
    NON_ESSENTIAL_PROBLEM,
    PARTIAL_CELLS,
    PARTIAL_PROBLEM,
    TRIANGLES_PROBLEM,
)


@pytest.fixture
def client():
    return TestClient(app)


def test_health(client):
    assert client.get("/health").json()["status"] == "healthy"
    assert client.get("/").json()["status"] == "running"


def test_residue_route(client):
    response = client.post("/api/residue/residue", json={"problem": PARTIAL_PROBLEM})
    assert response.status_code == 200
    assert response.json()["determinant"] == "a1*b2*c0*x*y + a0*b1*c1*x^2*y - a1*b0*c1*x^2*y"


def test_partition_and_cdeg_routes(client):
    response = client.post("/api/residue/partition", json={"problem": PARTIAL_PROBLEM})
    assert response.json()["cells"] == PARTIAL_CELLS
    response = client.post("/api/residue/cdeg", json={"problem": TRIANGLES_PROBLEM})
    assert response.json()["cdeg"] == 1
    assert response.json()["strategy"] == "locally-unmixed"


def test_essential_route(client):
    response = client.post("/api/residue/essential", json=NON_ESSENTIAL_PROBLEM)
    assert response.status_code == 200
    assert response.json()["essential"] is False


def test_verify_route(client):
    response = client.post(
        "/api/residue/verify", json={"problem": PARTIAL_PROBLEM, "partition": PARTIAL_CELLS}
    )
    assert response.json()["passed"] is True


@pytest.mark.parametrize(
    "route, body, status",
    [
        ("residue", {"problem": EXCEPTIONAL_PROBLEM}, 409),
        ("residue", {"problem": NON_ESSENTIAL_PROBLEM}, 422),
        ("residue", {"problem": PARTIAL_PROBLEM, "strategy": "greedy"}, 400),
        ("verify", {"problem": PARTIAL_PROBLEM, "partition": PARTIAL_CELLS[:2]}, 400),
    ],
)
def test_error_status(client, route, body, status):
    response = client.post(f"/api/residue/{route}", json=body)
    assert response.status_code == status
    assert response.json()["detail"]["error"]


def test_schema_errors_are_unprocessable(client):
    response = client.post("/api/residue/residue", json={"problem": {"ambient_dim": 2, "polytopes": []}})
    assert response.status_code == 422


def test_engine_routes_run_in_the_threadpool():
    endpoints = [route.endpoint for route in router.routes]
    assert len(endpoints) == 5
    assert not any(inspect.iscoroutinefunction(endpoint) for endpoint in endpoints)
