"""Bundled flight scenarios: wind field plus initial kite placement,
mission script, and radio-link quality for one simulated run."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .config import ConfigError, parse_wind_block, wind_block_to_dict
from .wind import WindScenario


@dataclass(frozen=True)
class InitialState:
    """Where the kite starts. slack lays the kite closer to the winch than
    the paid-out line; theta_deg instead places it airborne on a taut line
    at that elevation angle. lock_line freezes the reel for rig-style
    tests."""

    line_out: float = 100.0
    slack: float = 0.0
    theta_deg: float | None = None
    lock_line: bool = False

    def position(self):
        if self.theta_deg is not None:
            a = math.radians(self.theta_deg)
            return self.line_out * math.cos(a), self.line_out * math.sin(a)
        return max(self.line_out - self.slack, 0.0), 0.0


@dataclass(frozen=True)
class LinkParams:
    loss_prob: float = 0.0
    latency: float = 0.0


@dataclass(frozen=True)
class MissionCommand:
    t: float
    mode: str
    duty: float | None = None


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    wind: WindScenario = WindScenario()
    initial: InitialState = InitialState()
    mission: tuple = ()
    link: LinkParams = LinkParams()
    duration: float = 120.0


def _takeoff_calm():
    # Still air throughout; the reel drags the kite aloft on its own.
    return ScenarioSpec(
        name="takeoff-calm",
        wind=WindScenario(v_ref=0.0),
        initial=InitialState(line_out=100.0, slack=4.0),
        mission=(MissionCommand(0.0, "TAKEOFF"),),
        duration=60.0,
    )


def _flight_6min():
    # Calm start; wind fills in at 30 s, strong enough to pull line out to
    # the working length, then eases to a hold-by-winding regime; a deep
    # lull hits at 270 s and the wind returns moderately after it.
    return ScenarioSpec(
        name="flight-6min",
        wind=WindScenario(alpha=0.02, v_ref=5.5, z_ref=10.0,
                          events=((0.0, 30.0, 0.0), (110.0, 270.0, 0.505),
                                  (270.0, 300.0, 0.08), (300.0, 360.0, 0.68))),
        initial=InitialState(line_out=100.0, slack=4.0),
        mission=(MissionCommand(0.0, "TAKEOFF"),),
        duration=360.0,
    )


def _steady_4mps():
    return ScenarioSpec(
        name="steady-4mps",
        wind=WindScenario(alpha=0.0, v_ref=4.0),
        initial=InitialState(line_out=100.0, theta_deg=20.0),
        mission=(MissionCommand(0.0, "WIND_HOLD"),),
        duration=120.0,
    )


def _gusty_training():
    # Long deep lulls from a low starting altitude: the kite grounds unless
    # the controller winds in. Used as the controller-tuning training
    # scenario.
    return ScenarioSpec(
        name="gusty-training",
        wind=WindScenario(alpha=0.14, v_ref=3.2, z_ref=10.0,
                          events=((10.0, 35.0, 0.05), (35.0, 50.0, 1.5),
                                  (50.0, 80.0, 0.06), (80.0, 95.0, 1.4),
                                  (95.0, 120.0, 0.05))),
        initial=InitialState(line_out=60.0, theta_deg=25.0),
        mission=(MissionCommand(0.0, "WIND_HOLD", 10.0),),
        duration=120.0,
    )


def _wind_step():
    # Fixed line, uniform wind doubling at t = 40 s; gives a clean
    # wind-to-altitude transient for lag analysis.
    return ScenarioSpec(
        name="wind-step",
        wind=WindScenario(alpha=0.0, v_ref=3.0, events=((40.0, 1e9, 2.0),)),
        initial=InitialState(line_out=100.0, theta_deg=30.0, lock_line=True),
        mission=(),
        duration=120.0,
    )


_BUILTIN = {
    "takeoff-calm": _takeoff_calm,
    "flight-6min": _flight_6min,
    "steady-4mps": _steady_4mps,
    "gusty-training": _gusty_training,
    "wind-step": _wind_step,
}


def builtin_scenario_names() -> list[str]:
    return sorted(_BUILTIN)


def builtin_scenario(name: str) -> ScenarioSpec:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise ConfigError(
            f"unknown scenario '{name}' (bundled: {', '.join(sorted(_BUILTIN))})"
        ) from None


def resolve_scenario(name_or_path: str) -> ScenarioSpec:
    """A bundled scenario name, or a path to a standalone JSON wind block
    (same schema as the config's "wind" key); file scenarios default to a
    grounded takeoff mission."""
    if name_or_path in _BUILTIN:
        return _BUILTIN[name_or_path]()
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError(f"scenario '{name_or_path}' is neither bundled nor a file")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("scenario file must be a JSON object")
    from .config import _BLOCK_KEYS

    unknown = set(raw) - _BLOCK_KEYS["wind"]
    if unknown:
        raise ConfigError([f"unknown key '{k}' in scenario file"
                           for k in sorted(unknown)])
    try:
        wind = parse_wind_block(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value: {exc}") from exc
    return ScenarioSpec(
        name=path.stem,
        wind=wind,
        initial=InitialState(line_out=100.0, slack=4.0),
        mission=(MissionCommand(0.0, "TAKEOFF"),),
        duration=120.0,
    )


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "name": spec.name,
        "wind": wind_block_to_dict(spec.wind),
        "initial": {
            "line_out_m": spec.initial.line_out,
            "slack_m": spec.initial.slack,
            "theta_deg": spec.initial.theta_deg,
            "lock_line": spec.initial.lock_line,
        },
        "mission": [
            {"t_s": c.t, "mode": c.mode, "duty_pct": c.duty}
            for c in spec.mission
        ],
        "link": {"loss_prob": spec.link.loss_prob,
                 "latency_s": spec.link.latency},
        "duration_s": spec.duration,
    }


def scenario_from_dict(raw: dict) -> ScenarioSpec:
    init = raw.get("initial", {})
    link = raw.get("link", {})
    return ScenarioSpec(
        name=raw.get("name", "unnamed"),
        wind=parse_wind_block(raw.get("wind", {})),
        initial=InitialState(
            line_out=float(init.get("line_out_m", 100.0)),
            slack=float(init.get("slack_m", 0.0)),
            theta_deg=init.get("theta_deg"),
            lock_line=bool(init.get("lock_line", False)),
        ),
        mission=tuple(
            MissionCommand(float(c["t_s"]), str(c["mode"]),
                           c.get("duty_pct"))
            for c in raw.get("mission", ())
        ),
        link=LinkParams(loss_prob=float(link.get("loss_prob", 0.0)),
                        latency=float(link.get("latency_s", 0.0))),
        duration=float(raw.get("duration_s", 120.0)),
    )
