"""Live ground-station HTTP service.

One simulation run at a time, advanced by a background thread that owns all
mutable state. API handlers talk to it only through a command queue
(applied at tick boundaries) and immutable state snapshots; GET /api/stream
pushes one JSON object per control tick.
"""
from __future__ import annotations

import json
import math
import queue
import threading
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse

from .config import Config, validate_config
from .controllers import Mode, allowed_transition
from .scenarios import ScenarioSpec
from .station import SimulationRun, write_run
from .schemas import (
    CommandRequest,
    CommandResponse,
    RunsResponse,
    RunSummary,
    StateResponse,
    ThresholdTableRequest,
)

STREAM_QUEUE_SIZE = 512


class SessionError(RuntimeError):
    pass


class StationSession:
    """Owns the live run and its pacing thread."""

    def __init__(self, config: Config, scenario: ScenarioSpec,
                 duration: float | None = None, seed: int = 0,
                 speed: float = 1.0, realtime: bool = True,
                 out_dir=None):
        self.run = SimulationRun(config, scenario, duration, seed)
        self.run_id = self.run.manifest().run_id
        self.speed = speed
        self.realtime = realtime
        self.out_dir = Path(out_dir) if out_dir else None
        self._lock = threading.Lock()
        self._snapshot = self.run.snapshot() | {"run_id": self.run_id}
        self._subscribers: list[queue.Queue] = []
        self._commands: queue.Queue = queue.Queue()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._written = False

    # -- lifecycle ---------------------------------------------------------

    def start(self):
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def _loop(self):
        period = self.run.period
        next_wall = time.monotonic()
        while not self._stop.is_set() and not self.run.finished:
            self._drain_commands()
            self.run.tick()
            snap = self.run.snapshot() | {"run_id": self.run_id}
            with self._lock:
                self._snapshot = snap
            self._publish(snap)
            if self.realtime:
                next_wall += period / self.speed
                delay = next_wall - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
        if self.run.finished:
            self._finalize()
        self._publish(None)  # end-of-stream sentinel

    def _finalize(self):
        snap = self.run.snapshot() | {"run_id": self.run_id}
        with self._lock:
            self._snapshot = snap
        if self.out_dir and not self._written:
            write_run(self.run.records, self.run.manifest(), self.out_dir)
            self._written = True

    def _drain_commands(self):
        while True:
            try:
                kind, payload = self._commands.get_nowait()
            except queue.Empty:
                return
            if kind == "command":
                mode, duty = payload
                if allowed_transition(self.run.cstate.mode, Mode[mode]):
                    self.run.queue_command(mode, duty)
            else:
                self.run.swap_threshold_table(payload)

    def _publish(self, snap):
        for q in list(self._subscribers):
            try:
                q.put_nowait(snap)
            except queue.Full:
                pass  # slow consumer drops ticks, never stalls the loop

    # -- API surface -------------------------------------------------------

    def snapshot(self) -> dict:
        with self._lock:
            return self._snapshot

    def submit_command(self, mode: str, duty) -> None:
        current = Mode[self.snapshot()["mode"]]
        if not allowed_transition(current, Mode[mode]):
            raise SessionError(f"cannot switch {current.name} -> {mode}")
        self._commands.put(("command", (mode, duty)))

    def submit_table(self, config: Config) -> None:
        self._commands.put(("table", config))

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=STREAM_QUEUE_SIZE)
        q.put_nowait(self.snapshot())
        self._subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        if q in self._subscribers:
            self._subscribers.remove(q)


def _state_payload(snap: dict) -> dict:
    return {
        "t_s": snap["t_s"],
        "mode": snap["mode"],
        "duty_pct": snap["duty_pct"],
        "wind_mps": snap["wind_mps"],
        "kite": snap["kite"],
        "winch": snap["winch"],
        "seq": snap["seq"],
        "telemetry_loss": snap["telemetry_loss"],
        "finished": snap["finished"],
        "run_id": snap["run_id"],
    }


def create_app(session: StationSession,
               console_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="kitesim ground station", version="0.1.0")
    app.state.session = session

    @app.get("/api/state", response_model=StateResponse)
    def get_state():
        return _state_payload(session.snapshot())

    @app.post("/api/command", response_model=CommandResponse)
    def post_command(cmd: CommandRequest):
        try:
            session.submit_command(cmd.mode, cmd.duty)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return CommandResponse(accepted=True, detail=f"mode {cmd.mode} queued")

    @app.post("/api/config", response_model=CommandResponse)
    def post_config(table: ThresholdTableRequest):
        from dataclasses import replace

        ctrl = session.run.config.controller
        thresholds = tuple(table.thresholds_mps)
        if not thresholds or not math.isinf(thresholds[-1]):
            thresholds = thresholds + (math.inf,)
        candidate = replace(
            session.run.config,
            controller=replace(ctrl, thresholds=thresholds,
                               deltas=tuple(table.deltas_pct),
                               n_stages=len(table.deltas_pct)),
        )
        violations = validate_config(candidate)
        if violations:
            raise HTTPException(status_code=400, detail="; ".join(violations))
        session.submit_table(candidate)
        return CommandResponse(accepted=True, detail="threshold table queued")

    @app.get("/api/runs", response_model=RunsResponse)
    def get_runs():
        runs = []
        if session.out_dir and session.out_dir.exists():
            for mpath in sorted(session.out_dir.glob("**/manifest.json")):
                raw = json.loads(mpath.read_text())
                runs.append(RunSummary(
                    run_id=raw["run_id"], created_utc=raw["created_utc"],
                    scenario=raw.get("scenario", {}).get("name", ""),
                    duration_s=raw["duration_s"],
                    outcome=raw.get("outcome", {})))
        return RunsResponse(runs=runs, live_run_id=session.run_id)

    @app.get("/api/stream")
    def get_stream():
        def gen():
            q = session.subscribe()
            try:
                while True:
                    try:
                        snap = q.get(timeout=30.0)
                    except queue.Empty:
                        break
                    if snap is None:
                        break
                    yield json.dumps(_state_payload(snap)) + "\n"
            finally:
                session.unsubscribe(q)

        return StreamingResponse(gen(), media_type="application/x-ndjson")

    if console_dir is not None and (console_dir / "index.html").exists():
        from fastapi.responses import RedirectResponse
        from fastapi.staticfiles import StaticFiles

        @app.get("/")
        def console_redirect():
            return RedirectResponse("/console/")

        app.mount("/console",
                  StaticFiles(directory=console_dir, html=True),
                  name="console")

    return app
