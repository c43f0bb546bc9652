import json

import pytest
from fastapi.testclient import TestClient

from src.API.fast_api import API_KEY, app
from src.cli_io.documents import dumps_network
from src.sim.gallery import build_abc_example

HEADERS = {"x-api-key": API_KEY}


@pytest.fixture
def client():
    return TestClient(app)


def test_healthz_needs_no_key(client):
    res = client.get("/healthz")
    assert res.status_code == 200
    assert res.json()["ok"] is True


def test_key_required(client):
    assert client.get("/gallery").status_code == 401
    assert client.get("/gallery", headers={"x-api-key": "wrong"}).status_code == 401


def test_gallery_build_then_flow(client):
    res = client.post("/gallery/shift", json={"n_sites": 4}, headers=HEADERS)
    assert res.status_code == 200
    doc = res.json()
    flow = client.post("/flow", json=doc, headers=HEADERS).json()
    assert flow["net_flow"]["exact"] == "1"
    cost = client.post("/cost", json=doc, headers=HEADERS).json()
    assert cost["unit"] == "qudits"


def test_gallery_errors(client):
    assert client.post("/gallery/nosuch", headers=HEADERS).status_code == 404
    assert client.post("/gallery/kw", json={"d": 3}, headers=HEADERS).status_code == 422


def test_validate_reports_loops(client):
    doc = json.loads(dumps_network(build_abc_example()))
    body = client.post("/validate", json=doc, headers=HEADERS).json()
    assert body["dag"] is False


def test_bad_documents_are_422(client, shift4):
    doc = json.loads(dumps_network(shift4))
    doc["edges"][0]["to"] = "nowhere"
    res = client.post("/validate", json=doc, headers=HEADERS)
    assert res.status_code == 422
    assert "/edges/0" in res.json()["detail"]
    doc["format_version"] = "2"
    assert client.post("/flow", json=doc, headers=HEADERS).status_code == 422
