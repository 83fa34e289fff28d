"""Ground-station engine: advances the plant at the physics step, runs the
control loop once per period over the framed telemetry link, and records
the flight log plus a reproducibility manifest."""
from __future__ import annotations

import hashlib
import json
import math
import random
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import physics, sensors, telemetry
from .config import Config, config_from_dict, config_to_dict
from .controllers import ControllerState, Mode, set_mode, controller_tick
from .flightlog import FlightLogRecord, write_log
from .scenarios import ScenarioSpec, scenario_from_dict, scenario_to_dict
from .sensors import GpsOrigin, SensorReading
from .wind import wind_at

# Altitude above which a record counts as airborne for run summaries.
ALOFT_ALT_M = 0.5

DEFAULT_ORIGIN = GpsOrigin(lat=35.0, lon=136.0, elevation=0.0)

LOG_FILENAME = "flight_log.csv"
MANIFEST_FILENAME = "manifest.json"


def _mix(seed: int, salt: int) -> int:
    return (seed * 2654435761 + salt * 97531) & 0xFFFFFFFF


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    created_utc: str
    seed: int
    duration: float
    config: dict
    scenario: dict
    outcome: dict
    log_file: str = LOG_FILENAME

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_utc": self.created_utc,
            "seed": self.seed,
            "duration_s": self.duration,
            "config": self.config,
            "scenario": self.scenario,
            "outcome": self.outcome,
            "log_file": self.log_file,
        }


def _run_id(config_dict: dict, scenario_dict: dict, seed: int,
            duration: float) -> str:
    blob = json.dumps([config_dict, scenario_dict, seed, duration],
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


class SimulationRun:
    """One closed-loop run, advanced one control period per tick():
    sensors -> downlink frames -> controller -> command frame -> winch ->
    physics substeps. Deterministic for a given (config, scenario, seed).
    """

    def __init__(self, config: Config, scenario: ScenarioSpec,
                 duration: float | None = None, seed: int = 0,
                 origin: GpsOrigin = DEFAULT_ORIGIN):
        self.config = config
        self.scenario = scenario
        self.duration = scenario.duration if duration is None else duration
        self.seed = seed
        self.origin = origin

        ctrl = config.controller
        self.period = ctrl.period
        self.steps_per_tick = round(ctrl.period / config.dt)
        self.n_ticks = max(1, round(self.duration / ctrl.period))
        self.tick_count = 0
        self.phys_steps = 0

        x0, z0 = scenario.initial.position()
        self.state = physics.KiteState(x=x0, z=z0, airborne=z0 > physics.GROUND_EPS)
        self.winch = physics.WinchState(duty=0.0, line_out=scenario.initial.line_out)
        self.cstate = ControllerState()
        self.lock_line = scenario.initial.lock_line

        self._sensor_rng = random.Random(_mix(seed, 1))
        self.downlink = telemetry.Channel(scenario.link.loss_prob,
                                          scenario.link.latency,
                                          seed=_mix(seed, 2))
        self.uplink = telemetry.Channel(0.0, 0.0, seed=_mix(seed, 3))
        self.parser = telemetry.StreamParser()
        self._telemetry_seq = 0
        self._command_seq = 0
        self._last_reading: SensorReading | None = None
        self._last_seq = 0
        self._pending: list = []  # operator commands for the next boundary
        self._mission = list(scenario.mission)
        # commands at t=0 are initial conditions, not transitions
        while self._mission and self._mission[0].t <= 0.0:
            cmd = self._mission.pop(0)
            self.cstate.mode = Mode[cmd.mode]
            self.cstate.takeoff_t0 = 0.0
            self.cstate.t_c = None
            if cmd.duty is not None:
                self.cstate.manual_duty = cmd.duty
                self.cstate.duty = cmd.duty
        self._prev_vx = 0.0
        self._prev_vz = 0.0
        self._prev_theta = math.atan2(z0, x0) if (x0 or z0) else 0.0
        self.ground_pressure = sensors.SEA_LEVEL_PRESSURE
        self.records: list[FlightLogRecord] = []
        self.max_altitude = 0.0

    # -- operator interface --------------------------------------------------

    def queue_command(self, mode: str, duty: float | None = None) -> None:
        self._pending.append((mode, duty))

    def swap_threshold_table(self, controller_cfg) -> None:
        self._pending.append(("__table__", controller_cfg))

    @property
    def t(self) -> float:
        return self.phys_steps * self.config.dt

    @property
    def finished(self) -> bool:
        return self.tick_count >= self.n_ticks

    # -- loop ------------------------------------------------------------------

    def _apply_boundary_commands(self, t: float) -> None:
        while self._mission and self._mission[0].t <= t + 1e-9:
            cmd = self._mission.pop(0)
            set_mode(self.cstate, Mode[cmd.mode], t, cmd.duty)
        for mode, duty in self._pending:
            if mode == "__table__":
                self.config = duty  # pre-validated Config
            else:
                set_mode(self.cstate, Mode[mode], t, duty)
        self._pending.clear()

    def _sense(self, t: float) -> SensorReading:
        st = self.state
        w = wind_at(self.scenario.wind, st.z, t)
        apparent = (w - st.vx, -st.vz)
        tilt = math.atan2(st.z, st.x) if (st.x or st.z) else 0.0
        wx, wy = sensors.anemometer_read(apparent, tilt, self._sensor_rng)
        pressure = sensors.pressure_at_altitude(st.z, self.ground_pressure)
        pressure += sensors.BARO_SIGMA_PA * self._sensor_rng.gauss(0.0, 1.0)
        pressure = min(max(pressure, 30000.0), 110000.0)
        baro = sensors.baro_altitude(pressure, self.ground_pressure)
        lat, lon, gps_alt = sensors.gps_read(st.x, st.z, self.origin,
                                             self._sensor_rng)
        dtp = self.period
        accel = ((st.vx - self._prev_vx) / dtp, 0.0,
                 (st.vz - self._prev_vz) / dtp + self.config.constants.gravity)
        theta = math.atan2(st.z, st.x) if (st.x or st.z) else self._prev_theta
        gyro = (0.0, math.degrees(theta - self._prev_theta) / dtp, 0.0)
        self._prev_vx, self._prev_vz = st.vx, st.vz
        self._prev_theta = theta
        return SensorReading(t=t, wind_x=wx, wind_y=wy, pressure=pressure,
                             baro_alt=baro, lat=lat, lon=lon, gps_alt=gps_alt,
                             accel=accel, gyro=gyro)

    def tick(self) -> FlightLogRecord:
        """Advance one control period and return the log record written at
        its start."""
        t = self.t
        self._apply_boundary_commands(t)

        # flight unit: sample sensors, frame, downlink
        reading = self._sense(t)
        frame = telemetry.TelemetryFrame(
            telemetry.FrameType.TELEMETRY, self._telemetry_seq & 0xFFFF,
            int(round(t * 1000.0)), telemetry.pack_telemetry(reading))
        self._telemetry_seq += 1
        self.downlink.send(frame, t)

        # ground unit: parse whatever the radio delivered this period
        for f in self.downlink.poll(t):
            for parsed in self.parser.feed(telemetry.encode_frame(f)):
                if parsed.frame_type is telemetry.FrameType.TELEMETRY:
                    self._last_reading = telemetry.unpack_telemetry(
                        parsed.payload, parsed.timestamp_ms / 1000.0)
                    self._last_seq = parsed.seq

        duty = controller_tick(self.cstate, self._last_reading,
                               self.winch.line_out, self.config.controller, t)

        # command frame to the winch microcontroller (wired, but framed)
        cmd = telemetry.TelemetryFrame(
            telemetry.FrameType.COMMAND, self._command_seq & 0xFFFF,
            int(round(t * 1000.0)),
            telemetry.pack_command(telemetry.MODE_CODES[self.cstate.mode.name],
                                   duty))
        self._command_seq += 1
        self.uplink.send(cmd, t)
        for f in self.uplink.poll(t):
            _, wire_duty = telemetry.unpack_command(f.payload)
            self.winch.duty = wire_duty

        w_measured = (sensors.combined_speed(self._last_reading.wind_x,
                                             self._last_reading.wind_y)
                      if self._last_reading else 0.0)
        record = FlightLogRecord(
            t=t, duty=self.winch.duty, wind=w_measured,
            line_out=self.winch.line_out, altitude=self.state.z,
            tension=self.state.tension, mode=self.cstate.mode.name,
            seq=self._last_seq)
        self.records.append(record)
        if self.state.z > self.max_altitude:
            self.max_altitude = self.state.z

        # physics substeps to the next boundary
        cfg = self.config
        scenario_wind = self.scenario.wind
        for _ in range(self.steps_per_tick):
            tp = self.phys_steps * cfg.dt
            w = wind_at(scenario_wind, self.state.z, tp)
            self.state, self.winch = physics.step(
                self.state, self.winch, w, cfg.dt, cfg.constants, cfg.winch,
                lock_line=self.lock_line)
            self.phys_steps += 1
        self.tick_count += 1
        return record

    def run(self) -> list[FlightLogRecord]:
        while not self.finished:
            self.tick()
        return self.records

    def snapshot(self) -> dict:
        """Immutable view of the latest state for the live API."""
        st, wn = self.state, self.winch
        rec_wind = (sensors.combined_speed(self._last_reading.wind_x,
                                           self._last_reading.wind_y)
                    if self._last_reading else 0.0)
        return {
            "t_s": self.t,
            "mode": self.cstate.mode.name,
            "duty_pct": self.cstate.duty,
            "wind_mps": rec_wind,
            "kite": {"x_m": st.x, "z_m": st.z, "vx_mps": st.vx,
                     "vz_mps": st.vz, "tension_n": st.tension,
                     "airborne": st.airborne},
            "winch": {"duty_pct": wn.duty, "line_out_m": wn.line_out,
                      "line_speed_mps": wn.line_speed,
                      "encoder_m": wn.encoder_m},
            "seq": self._last_seq,
            "telemetry_loss": self.cstate.telemetry_loss,
            "finished": self.finished,
        }

    def outcome(self) -> dict:
        aloft = sum(1 for r in self.records if r.altitude > ALOFT_ALT_M)
        return {
            "max_altitude_m": self.max_altitude,
            "time_aloft_s": aloft * self.period,
            "line_travel_m": self.winch.encoder_m,
            "ticks": len(self.records),
        }

    def manifest(self) -> RunManifest:
        cfg_dict = config_to_dict(self.config)
        scn_dict = scenario_to_dict(self.scenario)
        return RunManifest(
            run_id=_run_id(cfg_dict, scn_dict, self.seed, self.duration),
            created_utc=datetime.now(timezone.utc).isoformat(),
            seed=self.seed,
            duration=self.duration,
            config=cfg_dict,
            scenario=scn_dict,
            outcome=self.outcome(),
        )


def run_scenario(config: Config, scenario: ScenarioSpec,
                 duration: float | None = None, seed: int = 0):
    """Run the full closed loop to completion; returns (records, manifest)."""
    run = SimulationRun(config, scenario, duration, seed)
    run.run()
    return run.records, run.manifest()


def write_run(records, manifest: RunManifest, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_log(records, out / manifest.log_file)
    (out / MANIFEST_FILENAME).write_text(
        json.dumps(manifest.to_dict(), indent=2) + "\n")
    return out


def load_manifest(path) -> RunManifest:
    raw = json.loads(Path(path).read_text())
    return RunManifest(
        run_id=raw["run_id"], created_utc=raw["created_utc"],
        seed=int(raw["seed"]), duration=float(raw["duration_s"]),
        config=raw["config"], scenario=raw["scenario"],
        outcome=raw.get("outcome", {}), log_file=raw.get("log_file", LOG_FILENAME),
    )


def replay(manifest_path):
    """Re-run a manifest; returns (records, manifest, matches_original).
    matches_original is None when the original log is missing."""
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    config = config_from_dict(manifest.config)
    scenario = scenario_from_dict(manifest.scenario)
    records, _ = run_scenario(config, scenario, manifest.duration, manifest.seed)
    original = manifest_path.parent / manifest.log_file
    matches = None
    if original.exists():
        with tempfile.TemporaryDirectory() as tmpdir:
            tmp = Path(tmpdir) / "replay.csv"
            write_log(records, tmp)
            matches = tmp.read_bytes() == original.read_bytes()
    return records, manifest, matches
