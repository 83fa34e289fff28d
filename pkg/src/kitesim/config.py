"""Shared domain types, unit conventions, and configuration handling.

Every quantity is SI (m, s, kg, N, Pa) except the winch duty ratio, which
is a percentage 0-100 everywhere in the codebase.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .wind import WindScenario

# Lift coefficient that balances kite + flight-unit weight at the 2.5 m/s
# sustain wind; drag defaults to a glide-ratio-like fraction of it.
DEFAULT_LIFT_COEFF = 2 * (0.70 + 0.85) * 9.81 / (1.225 * 4.8 * 2.5**2)
DEFAULT_DRAG_COEFF = DEFAULT_LIFT_COEFF / 3.0


class ConfigError(ValueError):
    """Config file could not be parsed or failed validation."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class SimClock:
    """Fixed-step clock; time is always derived from the integer tick count
    so that t never drifts from float accumulation."""

    dt: float
    tick_index: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def t(self) -> float:
        return self.tick_index * self.dt

    def advanced(self, ticks: int = 1) -> "SimClock":
        return SimClock(self.dt, self.tick_index + ticks)


@dataclass(frozen=True)
class PhysicalConstants:
    """Plant constants. Defaults describe the prototype: a 3.2 m x 1.5 m
    kite (~700 g) carrying an 850 g instrument package on a 37.1 g/100 m
    line. Construction does not validate; see validate_config."""

    kite_mass: float = 0.70
    unit_mass: float = 0.85
    wing_area: float = 4.8
    lift_coeff: float = DEFAULT_LIFT_COEFF
    drag_coeff: float = DEFAULT_DRAG_COEFF
    air_density: float = 1.225
    gravity: float = 9.81
    line_mass_per_m: float = 0.000371

    @property
    def flight_mass(self) -> float:
        """Kite plus instrument package, excluding line."""
        return self.kite_mass + self.unit_mass


@dataclass(frozen=True)
class WinchParams:
    """Line-winding machine model. The reel is rated for 64 kgf of pull and
    2.5 m/s take-up; release is governed by an electric clutch whose brake
    strength scales with the same duty command."""

    max_force_kgf: float = 64.0
    max_takeup: float = 2.5
    max_payout: float = 3.0
    # line speed produced per newton of surplus motor pull / clutch slip
    k_motor: float = 0.004
    k_clutch: float = 0.05
    static_brake: float = 8.0
    line_capacity: float = 300.0

    def max_force_n(self, gravity: float) -> float:
        return self.max_force_kgf * gravity


@dataclass(frozen=True)
class ControllerConfig:
    """Parameters of the two control laws.

    Takeoff: duty ramps to d_max over t_u, holds while more than
    (l_start - pull_in) of line remains out, then ramps to zero over t_d.

    Wind hold: once per period the duty is incremented by the delta of the
    wind-speed band the measured wind falls in. thresholds holds the band
    edges starting at 0 and ending with an +inf sentinel; deltas has one
    entry per band and must be non-increasing (weak wind -> wind in,
    strong wind -> pay out).
    """

    d_max: float = 100.0
    t_u: float = 3.0
    t_d: float = 3.0
    l_start: float = 100.0
    pull_in: float = 50.0
    thresholds: tuple = (0.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, math.inf)
    deltas: tuple = (8.0, 5.0, 2.0, 0.0, -2.0, -5.0, -8.0)
    period: float = 0.2
    n_stages: int = 7


@dataclass(frozen=True)
class Config:
    constants: PhysicalConstants = PhysicalConstants()
    winch: WinchParams = WinchParams()
    controller: ControllerConfig = ControllerConfig()
    wind: WindScenario = WindScenario()
    dt: float = 0.01


_BLOCK_KEYS = {
    "physics": {
        "kite_mass_kg", "unit_mass_kg", "wing_area_m2", "lift_coeff",
        "drag_coeff", "air_density_kgpm3", "gravity_mps2",
        "line_mass_per_m_kgpm", "dt_s",
    },
    "winch": {
        "max_force_kgf", "max_takeup_mps", "max_payout_mps",
        "k_motor_mps_per_n", "k_clutch_mps_per_n", "static_brake_n",
        "line_capacity_m",
    },
    "takeoff": {"d_max", "t_u_s", "t_d_s", "l_start_m", "pull_in_m"},
    "windhold": {"thresholds_mps", "deltas_pct", "period_s"},
    "wind": {
        "alpha", "v_ref_mps", "z_ref_m", "events", "noise_seed",
        "noise_amplitude_mps",
    },
}


def _check_unknown_keys(raw: dict) -> list[str]:
    violations = []
    for key in raw:
        if key not in _BLOCK_KEYS:
            violations.append(f"unknown top-level key '{key}'")
    for block, allowed in _BLOCK_KEYS.items():
        sub = raw.get(block)
        if sub is None:
            continue
        if not isinstance(sub, dict):
            violations.append(f"'{block}' must be an object")
            continue
        for key in sub:
            if key not in allowed:
                violations.append(f"unknown key '{key}' in '{block}'")
    return violations


def parse_wind_block(raw: dict) -> WindScenario:
    """Build a WindScenario from its JSON block (also used for standalone
    scenario files)."""
    events = tuple(tuple(float(v) for v in ev) for ev in raw.get("events", ()))
    return WindScenario(
        alpha=float(raw.get("alpha", 0.14)),
        v_ref=float(raw.get("v_ref_mps", 0.0)),
        z_ref=float(raw.get("z_ref_m", 10.0)),
        events=events,
        noise_seed=int(raw.get("noise_seed", 0)),
        noise_amplitude=float(raw.get("noise_amplitude_mps", 0.0)),
    )


def config_from_dict(raw: dict) -> Config:
    """Build and validate a Config from parsed JSON. Raises ConfigError."""
    violations = _check_unknown_keys(raw)
    if violations:
        raise ConfigError(violations)
    try:
        cfg = _build_config(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value: {exc}") from exc
    violations = validate_config(cfg)
    if violations:
        raise ConfigError(violations)
    return cfg


def _build_config(raw: dict) -> Config:
    c_def, w_def, k_def = PhysicalConstants(), WinchParams(), ControllerConfig()

    phys = raw.get("physics", {})
    lift = phys.get("lift_coeff")
    drag = phys.get("drag_coeff")
    constants = PhysicalConstants(
        kite_mass=float(phys.get("kite_mass_kg", c_def.kite_mass)),
        unit_mass=float(phys.get("unit_mass_kg", c_def.unit_mass)),
        wing_area=float(phys.get("wing_area_m2", c_def.wing_area)),
        lift_coeff=1.0,  # placeholder, replaced below
        drag_coeff=1.0,
        air_density=float(phys.get("air_density_kgpm3", c_def.air_density)),
        gravity=float(phys.get("gravity_mps2", c_def.gravity)),
        line_mass_per_m=float(phys.get("line_mass_per_m_kgpm",
                                       c_def.line_mass_per_m)),
    )
    if lift is None:
        # Late import: physics owns the calibration but consumes these types.
        from .physics import calibrate_lift_coeff

        lift = calibrate_lift_coeff(constants)
    lift = float(lift)
    drag = lift / 3.0 if drag is None else float(drag)
    constants = PhysicalConstants(
        kite_mass=constants.kite_mass,
        unit_mass=constants.unit_mass,
        wing_area=constants.wing_area,
        lift_coeff=lift,
        drag_coeff=drag,
        air_density=constants.air_density,
        gravity=constants.gravity,
        line_mass_per_m=constants.line_mass_per_m,
    )

    w = raw.get("winch", {})
    winch = WinchParams(
        max_force_kgf=float(w.get("max_force_kgf", w_def.max_force_kgf)),
        max_takeup=float(w.get("max_takeup_mps", w_def.max_takeup)),
        max_payout=float(w.get("max_payout_mps", w_def.max_payout)),
        k_motor=float(w.get("k_motor_mps_per_n", w_def.k_motor)),
        k_clutch=float(w.get("k_clutch_mps_per_n", w_def.k_clutch)),
        static_brake=float(w.get("static_brake_n", w_def.static_brake)),
        line_capacity=float(w.get("line_capacity_m", w_def.line_capacity)),
    )

    tk = raw.get("takeoff", {})
    wh = raw.get("windhold", {})
    thresholds = wh.get("thresholds_mps")
    if thresholds is None:
        thresholds = k_def.thresholds
    else:
        # The file lists the finite band edges; +inf sentinel closes the
        # last band.
        thresholds = tuple(float(v) for v in thresholds) + (math.inf,)
    deltas = wh.get("deltas_pct")
    deltas = k_def.deltas if deltas is None else tuple(
        float(v) for v in deltas)
    controller = ControllerConfig(
        d_max=float(tk.get("d_max", k_def.d_max)),
        t_u=float(tk.get("t_u_s", k_def.t_u)),
        t_d=float(tk.get("t_d_s", k_def.t_d)),
        l_start=float(tk.get("l_start_m", k_def.l_start)),
        pull_in=float(tk.get("pull_in_m", k_def.pull_in)),
        thresholds=thresholds,
        deltas=deltas,
        period=float(wh.get("period_s", k_def.period)),
        n_stages=len(deltas),
    )

    wind = parse_wind_block(raw.get("wind", {}))
    return Config(
        constants=constants,
        winch=winch,
        controller=controller,
        wind=wind,
        dt=float(phys.get("dt_s", 0.01)),
    )


def load_config(path) -> Config:
    """Load and validate a JSON config file. Raises ConfigError on parse
    failure or any invariant violation."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    return config_from_dict(raw)


def config_to_dict(cfg: Config) -> dict:
    c, w, k, s = cfg.constants, cfg.winch, cfg.controller, cfg.wind
    return {
        "physics": {
            "kite_mass_kg": c.kite_mass,
            "unit_mass_kg": c.unit_mass,
            "wing_area_m2": c.wing_area,
            "lift_coeff": c.lift_coeff,
            "drag_coeff": c.drag_coeff,
            "air_density_kgpm3": c.air_density,
            "gravity_mps2": c.gravity,
            "line_mass_per_m_kgpm": c.line_mass_per_m,
            "dt_s": cfg.dt,
        },
        "winch": {
            "max_force_kgf": w.max_force_kgf,
            "max_takeup_mps": w.max_takeup,
            "max_payout_mps": w.max_payout,
            "k_motor_mps_per_n": w.k_motor,
            "k_clutch_mps_per_n": w.k_clutch,
            "static_brake_n": w.static_brake,
            "line_capacity_m": w.line_capacity,
        },
        "takeoff": {
            "d_max": k.d_max,
            "t_u_s": k.t_u,
            "t_d_s": k.t_d,
            "l_start_m": k.l_start,
            "pull_in_m": k.pull_in,
        },
        "windhold": {
            "thresholds_mps": list(k.thresholds[:-1]),
            "deltas_pct": list(k.deltas),
            "period_s": k.period,
        },
        "wind": wind_block_to_dict(s),
    }


def wind_block_to_dict(s: WindScenario) -> dict:
    return {
        "alpha": s.alpha,
        "v_ref_mps": s.v_ref,
        "z_ref_m": s.z_ref,
        "events": [list(ev) for ev in s.events],
        "noise_seed": s.noise_seed,
        "noise_amplitude_mps": s.noise_amplitude,
    }


def save_config(cfg: Config, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")


def _positive(violations, name, value):
    if not value > 0:
        violations.append(f"{name} must be positive")


def validate_config(cfg: Config) -> list[str]:
    """Return the list of invariant violations (empty when valid). Never
    raises; violations are data."""
    v: list[str] = []
    c = cfg.constants
    for name in ("kite_mass", "unit_mass", "wing_area", "lift_coeff",
                 "drag_coeff", "air_density", "gravity", "line_mass_per_m"):
        _positive(v, name, getattr(c, name))

    w = cfg.winch
    for name in ("max_force_kgf", "max_takeup", "max_payout", "k_motor",
                 "k_clutch", "line_capacity"):
        _positive(v, name, getattr(w, name))
    if w.static_brake < 0:
        v.append("static_brake must be non-negative")
    if w.max_takeup > 2.5:
        v.append("max_takeup exceeds the 2.5 m/s reel rating")

    k = cfg.controller
    if not 0 < k.d_max <= 100:
        v.append("d_max out of range")
    _positive(v, "t_u", k.t_u)
    _positive(v, "t_d", k.t_d)
    _positive(v, "period", k.period)
    if not k.pull_in > 0:
        v.append("pull_in must be positive")
    elif k.pull_in > k.l_start:
        v.append("pull_in exceeds l_start")
    if not k.l_start > 0:
        v.append("l_start must be positive")
    if len(k.thresholds) < 2:
        v.append("thresholds must have at least two entries")
    else:
        if k.thresholds[0] != 0:
            v.append("thresholds must start at 0")
        if any(b <= a for a, b in zip(k.thresholds, k.thresholds[1:])):
            v.append("thresholds not increasing")
        if not math.isinf(k.thresholds[-1]):
            v.append("last threshold must be the +inf sentinel")
    if len(k.deltas) != len(k.thresholds) - 1 or k.n_stages != len(k.deltas):
        v.append("stage count mismatch: need one delta per band")
    if any(b > a for a, b in zip(k.deltas, k.deltas[1:])):
        v.append("deltas not non-increasing")

    s = cfg.wind
    if s.alpha < 0:
        v.append("alpha must be non-negative")
    if s.v_ref < 0:
        v.append("v_ref must be non-negative")
    if not s.z_ref > 0:
        v.append("z_ref must be positive")
    if s.noise_amplitude < 0:
        v.append("noise_amplitude must be non-negative")
    last_end = -math.inf
    for ev in s.events:
        if len(ev) != 3:
            v.append("wind event must be [t_start, t_end, multiplier]")
            break
        t0, t1, mult = ev
        if t1 <= t0:
            v.append("wind event must end after it starts")
        if t0 < last_end:
            v.append("wind events overlap or out of order")
        if mult < 0:
            v.append("wind event multiplier must be non-negative")
        last_end = t1

    if not cfg.dt > 0:
        v.append("dt must be positive")
    elif k.period > 0:
        ratio = k.period / cfg.dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            v.append("period not an integer multiple of dt")
    return v
