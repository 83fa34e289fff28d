"""Live API: state snapshots, command queueing, table hot-swap, stream."""
import json
import time

import pytest
from fastapi.testclient import TestClient

from kitesim.config import Config
from kitesim.scenarios import builtin_scenario
from kitesim.service import StationSession, create_app


@pytest.fixture()
def session(tmp_path):
    # fast pacing so tests advance real ticks quickly
    s = StationSession(Config(), builtin_scenario("steady-4mps"),
                       duration=120.0, seed=0, speed=200.0,
                       out_dir=tmp_path)
    s.start()
    yield s
    s.stop()


@pytest.fixture()
def client(session):
    return TestClient(create_app(session))


def wait_for(predicate, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        value = predicate()
        if value:
            return value
        time.sleep(0.01)
    raise AssertionError("condition not met in time")


class TestState:
    def test_state_shape(self, client):
        body = client.get("/api/state").json()
        assert body["mode"] in ("IDLE", "TAKEOFF", "RELEASE_TO_STATION",
                                "WIND_HOLD", "MANUAL")
        assert set(body["kite"]) == {"x_m", "z_m", "vx_mps", "vz_mps",
                                     "tension_n", "airborne"}
        assert set(body["winch"]) == {"duty_pct", "line_out_m",
                                      "line_speed_mps", "encoder_m"}
        assert body["run_id"]

    def test_state_advances(self, client):
        t0 = client.get("/api/state").json()["t_s"]
        wait_for(lambda: client.get("/api/state").json()["t_s"] > t0)


class TestCommands:
    def test_manual_duty_reflected_in_next_snapshots(self, client):
        r = client.post("/api/command", json={"mode": "MANUAL", "duty": 40})
        assert r.status_code == 200 and r.json()["accepted"]
        snap = wait_for(lambda: (lambda s: s if s["mode"] == "MANUAL" else None)(
            client.get("/api/state").json()))
        assert snap["duty_pct"] == 40.0

    def test_overrange_duty_rejected(self, client):
        before = client.get("/api/state").json()["duty_pct"]
        r = client.post("/api/command", json={"mode": "MANUAL", "duty": 140})
        assert r.status_code == 422
        assert client.get("/api/state").json()["duty_pct"] == before

    def test_illegal_transition_rejected(self, client):
        # steady-4mps starts in WIND_HOLD; TAKEOFF is not reachable from it
        r = client.post("/api/command", json={"mode": "TAKEOFF"})
        assert r.status_code == 409

    def test_unknown_mode_rejected(self, client):
        r = client.post("/api/command", json={"mode": "WARP"})
        assert r.status_code == 422


class TestConfigSwap:
    def test_valid_table_accepted(self, client, session):
        r = client.post("/api/config", json={
            "thresholds_mps": [0, 1.5, 2, 2.5, 3, 4, 6],
            "deltas_pct": [9, 5, 2, 0, -2, -5, -8]})
        assert r.status_code == 200
        wait_for(lambda: session.run.config.controller.deltas[0] == 9.0)

    def test_invalid_table_rejected(self, client, session):
        before = session.run.config.controller.deltas
        r = client.post("/api/config", json={
            "thresholds_mps": [0, 2, 1], "deltas_pct": [1, 0]})
        assert r.status_code == 400
        assert "thresholds not increasing" in r.json()["detail"]
        assert session.run.config.controller.deltas == before


class TestStream:
    def test_stream_pushes_tick_objects(self, client):
        ticks = []
        with client.stream("GET", "/api/stream") as response:
            for line in response.iter_lines():
                ticks.append(json.loads(line))
                if len(ticks) >= 5:
                    break
        assert len(ticks) == 5
        for tick in ticks:
            assert {"t_s", "mode", "duty_pct", "wind_mps", "kite",
                    "winch"} <= set(tick)
        assert ticks[-1]["t_s"] >= ticks[0]["t_s"]


class TestRuns:
    def test_runs_lists_finished_manifests(self, tmp_path):
        s = StationSession(Config(), builtin_scenario("steady-4mps"),
                           duration=1.0, seed=0, realtime=False,
                           out_dir=tmp_path)
        s.start()
        client = TestClient(create_app(s))
        wait_for(lambda: client.get("/api/state").json()["finished"])
        body = wait_for(lambda: (lambda b: b if b["runs"] else None)(
            client.get("/api/runs").json()))
        assert body["runs"][0]["run_id"] == body["live_run_id"]
        assert body["runs"][0]["outcome"]["ticks"] == 5
        s.stop()
