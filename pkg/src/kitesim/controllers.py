"""The two winch control laws and the mode machine that sequences them.

Takeoff drives the reel through a ramp / full-power / ramp-down duty
profile that drags the kite into the air in still air. Wind hold nudges
the duty once per period by a per-band increment chosen from the measured
wind speed: weak wind winds line in to keep apparent wind over the wing,
strong wind releases line so the kite climbs.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum

from .config import ControllerConfig
from .sensors import SensorReading, combined_speed


class Mode(Enum):
    IDLE = 0
    TAKEOFF = 1
    RELEASE_TO_STATION = 2
    WIND_HOLD = 3
    MANUAL = 4


# Operators may drop into MANUAL from anywhere and hand back to any mode;
# automatic flight only ever walks the takeoff -> release -> hold chain.
_CHAIN = {
    (Mode.IDLE, Mode.TAKEOFF),
    (Mode.TAKEOFF, Mode.RELEASE_TO_STATION),
    (Mode.RELEASE_TO_STATION, Mode.WIND_HOLD),
}

RELEASE_DUTY_PCT = 5.0
RELEASE_TARGET_M = 100.0
STALE_AFTER_PERIODS = 2


class ModeTransitionError(ValueError):
    pass


@dataclass
class ControllerState:
    mode: Mode = Mode.IDLE
    duty: float = 0.0
    takeoff_t0: float = 0.0
    t_c: float | None = None
    stage_index: int = 0
    manual_duty: float = 0.0
    release_target: float = RELEASE_TARGET_M
    telemetry_loss: bool = False


def allowed_transition(current: Mode, new: Mode) -> bool:
    if new is current:
        return True
    if new is Mode.MANUAL or current is Mode.MANUAL:
        return True
    return (current, new) in _CHAIN


def set_mode(state: ControllerState, new: Mode, t: float,
             duty: float | None = None) -> None:
    """Apply an operator or mission mode command at a tick boundary."""
    if not allowed_transition(state.mode, new):
        raise ModeTransitionError(f"cannot switch {state.mode.name} -> {new.name}")
    if new is Mode.TAKEOFF and state.mode is not Mode.TAKEOFF:
        state.takeoff_t0 = t
        state.t_c = None
    if new is Mode.MANUAL:
        state.manual_duty = state.duty if duty is None else duty
    state.mode = new


def takeoff_duty(t: float, l: float, cfg: ControllerConfig,
                 state: ControllerState) -> float:
    """Takeoff duty profile at time t since takeoff start with l meters of
    line out.

    Ramp to d_max over t_u; hold d_max while more than (l_start - pull_in)
    of line remains; record the hold-exit time once and ramp down to zero
    over t_d. Branches are applied in that order, so the ramp wins for
    t <= t_u.
    """
    if t <= cfg.t_u:
        return cfg.d_max * t / cfg.t_u
    if state.t_c is None:
        if cfg.l_start - cfg.pull_in < l:
            return cfg.d_max
        state.t_c = t
    elapsed = t - state.t_c
    if elapsed < cfg.t_d:
        return cfg.d_max - cfg.d_max * elapsed / cfg.t_d
    return 0.0


def stage_index(w: float, thresholds) -> int:
    """1-based wind band index: the unique i with W_{i-1} <= w < W_i.
    Speeds exactly on a band edge belong to the upper band."""
    n = len(thresholds) - 1
    return min(max(bisect_right(thresholds, w), 1), n)


def wind_hold_update(duty_prev: float, w: float, cfg: ControllerConfig) -> float:
    """One wind-hold step: add the band increment for wind speed w and
    clamp to [0, d_max]."""
    duty = duty_prev + cfg.deltas[stage_index(w, cfg.thresholds) - 1]
    return min(max(duty, 0.0), cfg.d_max)


def release_to_station(l: float, target_l: float = RELEASE_TARGET_M):
    """Low-brake release until the line has paid out to the working length.
    Returns (duty, reached)."""
    if l >= target_l:
        return RELEASE_DUTY_PCT, True
    return RELEASE_DUTY_PCT, False


def controller_tick(state: ControllerState, reading: SensorReading | None,
                    line_out: float, cfg: ControllerConfig, t: float) -> float:
    """Run one control period: dispatch to the active mode's law and return
    the duty command. Stale or missing telemetry (older than two periods)
    freezes the previous duty and raises the loss flag."""
    if reading is None or t - reading.t > STALE_AFTER_PERIODS * cfg.period + 1e-9:
        state.telemetry_loss = True
        return state.duty
    state.telemetry_loss = False

    w = combined_speed(reading.wind_x, reading.wind_y)
    state.stage_index = stage_index(w, cfg.thresholds)

    if state.mode is Mode.IDLE:
        duty = 0.0
    elif state.mode is Mode.TAKEOFF:
        duty = takeoff_duty(t - state.takeoff_t0, line_out, cfg, state)
        if state.t_c is not None and t - state.takeoff_t0 - state.t_c >= cfg.t_d:
            state.mode = Mode.RELEASE_TO_STATION
            duty, _ = release_to_station(line_out, state.release_target)
    elif state.mode is Mode.RELEASE_TO_STATION:
        duty, reached = release_to_station(line_out, state.release_target)
        if reached:
            state.mode = Mode.WIND_HOLD
    elif state.mode is Mode.WIND_HOLD:
        duty = wind_hold_update(state.duty, w, cfg)
    else:  # MANUAL: operator duty passes through
        duty = min(max(state.manual_duty, 0.0), cfg.d_max)

    state.duty = duty
    return duty
