"""
Tests for the HTTP endpoints: /status, /api/recombine, /api/exact and
/api/solve.
"""

import random
import re
from unittest.mock import MagicMock, patch

from fastapi.testclient import TestClient

from app.config import settings
from app.main import app
from app.scheduling.errors import RecombinationTooLarge
from app.scheduling.exact import held_karp_path
from app.scheduling.instance import to_tsplib
from tests.helpers import random_instance

client = TestClient(app)

INST = random_instance(random.Random(21), 8, name="api8")
TEXT = to_tsplib(INST)


# ── /status ───────────────────────────────────────────────────────────────────


def test_status_ok():
    response = client.get("/status")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["limits"]["q_cap"] == settings.q_cap
    assert body["limits"]["held_karp_max_k"] == settings.held_karp_max_k


# ── /api/recombine ────────────────────────────────────────────────────────────


def test_recombine_pairwise_swaps():
    body = {"instance": TEXT, "parents": [[1, 2, 3, 4, 5, 6, 7, 8], [2, 1, 4, 3, 6, 5, 8, 7]]}
    response = client.post("/api/recombine", json=body)
    assert response.status_code == 200
    data = response.json()
    assert data["q"] == 4
    assert data["solutions"] == 16
    assert data["special_edges"] == 0
    assert data["oracle_checked"] is True
    assert data["oracle_agrees"] is True
    assert data["cost"] <= min(data["parent_costs"])
    assert sorted(data["offspring"]) == list(range(1, 9))


def test_recombine_identical_parents():
    order = [3, 1, 2, 8, 7, 6, 5, 4]
    response = client.post("/api/recombine", json={"instance": TEXT, "parents": [order, order]})
    assert response.status_code == 200
    assert response.json()["offspring"] == order
    assert response.json()["q"] == 0


def test_recombine_invalid_instance_returns_400():
    response = client.post("/api/recombine", json={"instance": "NAME: x\n", "parents": [[1], [1]]})
    assert response.status_code == 400
    detail = response.json()["detail"]
    assert detail["status"] == "error"
    assert "DIMENSION" in detail["message"]


def test_recombine_bad_parent_returns_400():
    body = {"instance": TEXT, "parents": [[1, 1, 3, 4, 5, 6, 7, 8], [1, 2, 3, 4, 5, 6, 7, 8]]}
    response = client.post("/api/recombine", json=body)
    assert response.status_code == 400


def test_recombine_requires_two_parents():
    response = client.post("/api/recombine", json={"instance": TEXT, "parents": [[1, 2]]})
    assert response.status_code == 422


def test_recombine_over_cap_returns_413(monkeypatch):
    monkeypatch.setattr(settings, "q_cap", 2)
    body = {"instance": TEXT, "parents": [[1, 2, 3, 4, 5, 6, 7, 8], [2, 1, 4, 3, 6, 5, 8, 7]]}
    response = client.post("/api/recombine", json=body)
    assert response.status_code == 413
    assert "q=4" in response.json()["detail"]["message"]


# ── /api/exact ────────────────────────────────────────────────────────────────


def test_exact_small_instance_uses_held_karp():
    response = client.post("/api/exact", json={"instance": TEXT})
    assert response.status_code == 200
    data = response.json()
    cost, order = held_karp_path(INST)
    assert data["method"] == "held_karp"
    assert data["cost"] == cost
    assert data["order"] == [v + 1 for v in order]


def test_exact_held_karp_takes_a_solver_slot():
    slots = MagicMock()
    with patch("app.api.routes.exact.batch_slots", slots):
        response = client.post("/api/exact", json={"instance": TEXT})
    assert response.status_code == 200
    assert response.json()["method"] == "held_karp"
    slots.__aenter__.assert_awaited_once()
    slots.__aexit__.assert_awaited_once()


def test_exact_model_export_needs_no_slot(monkeypatch):
    monkeypatch.setattr(settings, "held_karp_max_k", 4)
    slots = MagicMock()
    with patch("app.api.routes.exact.batch_slots", slots):
        response = client.post("/api/exact", json={"instance": TEXT})
    assert response.json()["method"] == "lp"
    slots.__aenter__.assert_not_awaited()


def test_exact_large_instance_returns_model(monkeypatch):
    monkeypatch.setattr(settings, "held_karp_max_k", 4)
    response = client.post("/api/exact", json={"instance": TEXT, "cuts": [[1, 2]]})
    assert response.status_code == 200
    data = response.json()
    assert data["method"] == "lp"
    assert re.search(r"subtour_1:[^\n]*x_1_2[^\n]*x_2_1[^\n]*<= 1", data["model"])


def test_exact_rejects_bad_cut(monkeypatch):
    monkeypatch.setattr(settings, "held_karp_max_k", 4)
    response = client.post("/api/exact", json={"instance": TEXT, "cuts": [[1, 99]]})
    assert response.status_code == 400
    response = client.post("/api/exact", json={"instance": TEXT, "cuts": [[1]]})
    assert response.status_code == 400


# ── /api/solve ────────────────────────────────────────────────────────────────


def _solve_body(**overrides):
    body = {
        "instance": TEXT,
        "runs": 3,
        "iterations": 40,
        "population_size": 6,
        "stats_period": 10,
        "seed": 11,
    }
    body.update(overrides)
    return body


def test_solve_returns_summary_and_dynamics():
    cost, _ = held_karp_path(INST)
    response = client.post("/api/solve", json=_solve_body(target=cost))
    assert response.status_code == 200
    data = response.json()
    assert data["k"] == 8
    assert data["summary"]["runs"] == 3
    assert data["summary"]["best"] >= cost
    assert data["summary"]["q_limit"] == 3
    assert "t_avg" not in data["summary"]
    assert [row["iteration"] for row in data["dynamics"]] == [10, 20, 30, 40]
    assert sorted(data["best_order"]) == list(range(1, 9))


def test_solve_is_deterministic():
    first = client.post("/api/solve", json=_solve_body()).json()
    second = client.post("/api/solve", json=_solve_body()).json()
    assert first == second


def test_solve_too_many_runs_returns_413():
    response = client.post("/api/solve", json=_solve_body(runs=settings.api_max_runs + 1))
    assert response.status_code == 413
    assert response.json()["detail"]["status"] == "error"


def test_solve_validation_error_returns_422():
    response = client.post("/api/solve", json=_solve_body(population_size=1))
    assert response.status_code == 422


def test_solve_recombination_limit_returns_413():
    with patch(
        "app.api.routes.solve.run_batch", side_effect=RecombinationTooLarge(31, 30)
    ):
        response = client.post("/api/solve", json=_solve_body())
    assert response.status_code == 413
    assert "q=31" in response.json()["detail"]["message"]
