"""HTTP session-service tests, driven through the ASGI test client."""

import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from modalsim.engine import Simulation, SimulationConfig
from modalsim.service import create_app


@pytest.fixture()
def client():
    app = create_app()
    with TestClient(app) as c:
        yield c


def create_session(client, seed=42, **config):
    payload = {"bundle": "default", "config": {"seed": seed, **config}}
    resp = client.post("/sessions", json=payload)
    assert resp.status_code == 201, resp.text
    return resp.json()


# ----------------------------------------------------------------- sessions


def test_create_session_defaults(client):
    body = create_session(client, seed=42)
    assert body["tick"] == 0
    assert len(body["snapshot"]["agents"]) == 200
    assert body["snapshot"]["config"]["seed"] == 42


def test_same_seed_same_initial_snapshot(client):
    a = create_session(client, seed=42)
    b = create_session(client, seed=42)
    assert a["session_id"] != b["session_id"]
    assert a["snapshot"] == b["snapshot"]


def test_invalid_config_rejected_with_field(client):
    resp = client.post("/sessions", json={"bundle": "default",
                                          "config": {"n_agents": 0}})
    assert resp.status_code == 422
    body = resp.json()
    assert body["code"] == "validation_error"
    assert "n_agents" in (body.get("field") or "")


def test_unknown_bundle_404(client):
    resp = client.post("/sessions", json={"bundle": "no-such"})
    assert resp.status_code == 404
    assert resp.json()["code"] == "bundle_not_found"


def test_client_token_idempotent_create(client):
    a = client.post("/sessions", json={"client_token": "tok-1"}).json()
    b = client.post("/sessions", json={"client_token": "tok-1"}).json()
    assert a["session_id"] == b["session_id"]
    assert b["created"] is False


def test_delete_session(client):
    sid = create_session(client)["session_id"]
    assert client.delete(f"/sessions/{sid}").status_code == 204
    assert client.get(f"/sessions/{sid}/snapshot").status_code == 404
    assert client.delete(f"/sessions/{sid}").status_code == 404


def test_unknown_session_404(client):
    resp = client.post("/sessions/nope/step", json={"n": 1})
    assert resp.status_code == 404
    assert resp.json()["code"] == "session_not_found"


def test_session_expiry():
    app = create_app(idle_timeout_s=0.2)
    with TestClient(app) as client:
        sid = create_session(client)["session_id"]
        assert client.get(f"/sessions/{sid}/snapshot").status_code == 200
        time.sleep(0.35)
        assert client.get(f"/sessions/{sid}/snapshot").status_code == 404


# ------------------------------------------------------------------ stepping


def test_step_returns_frames(client):
    sid = create_session(client)["session_id"]
    body = client.post(f"/sessions/{sid}/step", json={"n": 1}).json()
    assert body["tick"] == 1
    assert len(body["frames"]) == 1
    assert body["frames"][0]["tick"] == 1
    assert abs(sum(body["frames"][0]["modal_share"].values()) - 1.0) < 1e-9


def test_step_composition(client):
    a = create_session(client, seed=9)["session_id"]
    b = create_session(client, seed=9)["session_id"]
    frames_a = client.post(f"/sessions/{a}/step", json={"n": 3}).json()["frames"]
    frames_b = []
    for _ in range(3):
        frames_b += client.post(f"/sessions/{b}/step", json={"n": 1}).json()["frames"]
    assert frames_a == frames_b


def test_step_validation(client):
    sid = create_session(client)["session_id"]
    assert client.post(f"/sessions/{sid}/step", json={"n": 0}).status_code == 422


# ---------------------------------------------------------------- mutations


def test_set_env_mutation_echo_and_effect(client):
    sid = create_session(client)["session_id"]
    resp = client.post(f"/sessions/{sid}/mutations", json={
        "command": "set-env", "mode": "bike", "criterion": "safety", "value": 8.0})
    assert resp.status_code == 200
    body = resp.json()
    assert body["applied"] == {"mode": "bike", "criterion": "safety", "value": 8.0}
    assert body["tick"] == 0
    snap = client.get(f"/sessions/{sid}/snapshot").json()
    assert snap["objective"][0][5] == 8.0  # bike row, safety column


def test_set_env_out_of_range(client):
    sid = create_session(client)["session_id"]
    resp = client.post(f"/sessions/{sid}/mutations", json={
        "command": "set-env", "mode": "bike", "criterion": "safety", "value": 12.0})
    assert resp.status_code == 422
    assert resp.json()["field"] == "value"


def test_set_env_unknown_mode_field_error(client):
    sid = create_session(client)["session_id"]
    resp = client.post(f"/sessions/{sid}/mutations", json={
        "command": "set-env", "mode": "plane", "criterion": "safety", "value": 5.0})
    assert resp.status_code == 422
    assert resp.json()["field"] == "mode"


def test_reset_habits_next_frame_routine_zero(client):
    sid = create_session(client)["session_id"]
    client.post(f"/sessions/{sid}/step", json={"n": 5})
    client.post(f"/sessions/{sid}/mutations", json={"command": "reset-habits"})
    frame = client.post(f"/sessions/{sid}/step", json={"n": 1}).json()["frames"][0]
    assert frame["decisions"]["routine"] == 0


def test_set_priority_and_flags(client):
    sid = create_session(client)["session_id"]
    resp = client.post(f"/sessions/{sid}/mutations", json={
        "command": "set-priority", "criterion": "ecology", "target_mean": 9.0})
    assert resp.json()["applied"]["target_mean"] == 9.0
    resp = client.post(f"/sessions/{sid}/mutations", json={
        "command": "set-flags", "biases": False, "habits": False})
    assert resp.json()["applied"] == {"biases": False, "habits": False}
    snap = client.get(f"/sessions/{sid}/snapshot").json()
    assert snap["flags"] == {"biases_on": False, "habits_on": False}


# ------------------------------------------------------------------ metrics


def test_metrics_ranges(client):
    sid = create_session(client)["session_id"]
    client.post(f"/sessions/{sid}/step", json={"n": 10})
    full = client.get(f"/sessions/{sid}/metrics", params={"from": 0}).json()
    assert [f["tick"] for f in full["frames"]] == list(range(1, 11))
    window = client.get(f"/sessions/{sid}/metrics",
                        params={"from": 4, "to": 7}).json()
    assert [f["tick"] for f in window["frames"]] == [4, 5, 6, 7]
    empty = client.get(f"/sessions/{sid}/metrics",
                       params={"from": 9, "to": 3}).json()
    assert empty["frames"] == []


def test_metrics_refetch_identical(client):
    sid = create_session(client)["session_id"]
    client.post(f"/sessions/{sid}/step", json={"n": 6})
    a = client.get(f"/sessions/{sid}/metrics").text
    b = client.get(f"/sessions/{sid}/metrics").text
    assert a == b


def test_snapshot_at_tick_zero_matches_create(client):
    created = create_session(client, seed=5)
    sid = created["session_id"]
    snap = client.get(f"/sessions/{sid}/snapshot").json()
    assert snap == created["snapshot"]
    assert snap["schema_version"] == 1


# ------------------------------------------------------------------ bundles


def test_bundles_lists_default(client):
    assert "default" in client.get("/bundles").json()["bundles"]


def test_bundle_dir_listing(tmp_path):
    import shutil
    from importlib import resources

    src = resources.files("modalsim").joinpath("data", "default_bundle.json")
    shutil.copy(str(src), tmp_path / "grenoble.json")
    app = create_app(bundle_dir=str(tmp_path))
    with TestClient(app) as client:
        assert client.get("/bundles").json()["bundles"] == ["default", "grenoble"]
        resp = client.post("/sessions", json={"bundle": "grenoble"})
        assert resp.status_code == 201


# ----------------------------------------------------------------- auto-run


def test_auto_run_rate_and_pause(client):
    sid = create_session(client)["session_id"]
    resp = client.post(f"/sessions/{sid}/run",
                       json={"running": True, "ticks_per_second": 10})
    assert resp.json()["running"] is True
    time.sleep(1.0)
    client.post(f"/sessions/{sid}/run", json={"running": False,
                                              "ticks_per_second": 10})
    n = client.get(f"/sessions/{sid}/snapshot").json()["tick"]
    assert 8 <= n <= 13
    time.sleep(0.3)
    assert client.get(f"/sessions/{sid}/snapshot").json()["tick"] == n


def test_auto_run_rate_validation(client):
    sid = create_session(client)["session_id"]
    resp = client.post(f"/sessions/{sid}/run",
                       json={"running": True, "ticks_per_second": 500})
    assert resp.status_code == 422
    assert resp.json()["field"] == "ticks_per_second"


# -------------------------------------------------------------- concurrency


def test_concurrent_step_and_mutate_serialize(client):
    sid = create_session(client, seed=3)["session_id"]
    errors = []

    def stepper():
        for _ in range(10):
            r = client.post(f"/sessions/{sid}/step", json={"n": 5})
            if r.status_code != 200:
                errors.append(r.text)

    def mutator():
        for k in range(10):
            r = client.post(f"/sessions/{sid}/mutations", json={
                "command": "set-env", "mode": "bike", "criterion": "safety",
                "value": float(k % 10)})
            if r.status_code != 200:
                errors.append(r.text)

    threads = [threading.Thread(target=stepper), threading.Thread(target=mutator)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    body = client.get(f"/sessions/{sid}/metrics").json()
    assert body["tick"] == 50
    assert [f["tick"] for f in body["frames"]] == list(range(1, 51))
    muts = client.get(f"/sessions/{sid}/mutations").json()["mutations"]
    assert len(muts) == 10


# ------------------------------------------------------------------- replay


def test_service_run_replays_headlessly(client, default_bundle):
    sid = create_session(client, seed=31)["session_id"]
    client.post(f"/sessions/{sid}/step", json={"n": 5})
    client.post(f"/sessions/{sid}/mutations", json={
        "command": "set-env", "mode": "bike", "criterion": "safety", "value": 9.0})
    client.post(f"/sessions/{sid}/step", json={"n": 5})
    client.post(f"/sessions/{sid}/mutations", json={"command": "reset-habits"})
    client.post(f"/sessions/{sid}/step", json={"n": 5})
    service_frames = client.get(f"/sessions/{sid}/metrics").json()["frames"]
    mutations = client.get(f"/sessions/{sid}/mutations").json()["mutations"]

    sim = Simulation(default_bundle, SimulationConfig(seed=31))
    replayed = []
    for t in range(15):
        for m in mutations:
            if m["tick"] == t:
                if m["command"] == "set-env":
                    from modalsim.model import Criterion, Mode
                    sim.set_objective(Mode.from_label(m["applied"]["mode"]),
                                      Criterion.from_label(m["applied"]["criterion"]),
                                      m["applied"]["value"])
                elif m["command"] == "reset-habits":
                    sim.reset_habits()
        replayed.append(sim.tick().to_dict())
    assert replayed == service_frames
