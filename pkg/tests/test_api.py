"""Test the HTTP API."""
import pytest
from httpx import ASGITransport, AsyncClient

from api.main import app


def _client():
    return AsyncClient(transport=ASGITransport(app=app), base_url="http://test")


@pytest.mark.asyncio
async def test_health():
    async with _client() as client:
        response = await client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


@pytest.mark.asyncio
async def test_bound_endpoint():
    async with _client() as client:
        response = await client.post(
            "/api/experiments/bound", json={"family": "oful", "d": 2, "T": 98, "delta": 0.5, "eta": 0.1}
        )
    assert response.status_code == 200
    body = response.json()
    assert body["family"] == "oful"
    assert body["gamma"] is None
    assert body["bound"] > 0


@pytest.mark.asyncio
async def test_bound_endpoint_rejects_bad_delta():
    async with _client() as client:
        response = await client.post("/api/experiments/bound", json={"d": 2, "T": 10, "delta": 1.5})
    assert response.status_code == 422


@pytest.mark.asyncio
async def test_run_endpoint():
    config = {"algorithm": "oful-exact", "K": 5, "d": 2, "T": 10, "record_timing": False}
    async with _client() as client:
        response = await client.post("/api/experiments/run", json=config)
    assert response.status_code == 200
    body = response.json()
    assert len(body["summaries"]) == 1
    assert body["summaries"][0]["T"] == 10
    assert body["within_bound"] == [True]
