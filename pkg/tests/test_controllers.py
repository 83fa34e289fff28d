"""Control laws: takeoff profile, staged wind-hold updates, mode machine."""
import random

import pytest
from hypothesis import given, settings, strategies as st

from kitesim.config import ControllerConfig
from kitesim.controllers import (
    ControllerState,
    Mode,
    ModeTransitionError,
    RELEASE_DUTY_PCT,
    allowed_transition,
    controller_tick,
    release_to_station,
    set_mode,
    stage_index,
    takeoff_duty,
    wind_hold_update,
)
from kitesim.sensors import SensorReading

CFG = ControllerConfig()


def reading(t, wx, wy=0.0):
    return SensorReading(t=t, wind_x=wx, wind_y=wy, pressure=101325.0,
                         baro_alt=0.0, lat=35.0, lon=136.0, gps_alt=0.0)


class TestTakeoffProfile:
    def test_ramp_start_is_zero(self):
        assert takeoff_duty(0.0, 100.0, CFG, ControllerState()) == 0.0

    def test_ramp_midpoint(self):
        duty = takeoff_duty(CFG.t_u / 2, 100.0, CFG, ControllerState())
        assert duty == CFG.d_max / 2

    def test_continuity_at_ramp_end(self):
        st1 = ControllerState()
        ramp = takeoff_duty(CFG.t_u, 100.0, CFG, st1)
        hold = takeoff_duty(CFG.t_u + 1e-12, 100.0, CFG, ControllerState())
        assert ramp == CFG.d_max == hold

    def test_holds_while_line_above_target(self):
        state = ControllerState()
        for l in (99.0, 80.0, 50.1):
            assert takeoff_duty(10.0, l, CFG, state) == CFG.d_max
        assert state.t_c is None

    def test_decay_starts_when_pull_in_complete(self):
        state = ControllerState()
        # decay is continuous: the tick that records the hold-exit time
        # still evaluates to d_max, then the ramp-down begins
        assert takeoff_duty(20.0, 50.0, CFG, state) == CFG.d_max
        assert state.t_c == 20.0
        assert takeoff_duty(20.2, 50.0, CFG, state) < CFG.d_max

    def test_decay_midpoint(self):
        state = ControllerState()
        takeoff_duty(20.0, 50.0, CFG, state)
        duty = takeoff_duty(20.0 + CFG.t_d / 2, 48.0, CFG, state)
        assert duty == CFG.d_max / 2

    def test_zero_after_decay(self):
        state = ControllerState()
        takeoff_duty(20.0, 50.0, CFG, state)
        assert takeoff_duty(20.0 + CFG.t_d, 48.0, CFG, state) == 0.0
        assert takeoff_duty(50.0, 48.0, CFG, state) == 0.0

    def test_t_c_recorded_once(self):
        state = ControllerState()
        takeoff_duty(20.0, 50.0, CFG, state)
        takeoff_duty(21.0, 45.0, CFG, state)
        assert state.t_c == 20.0

    def test_ramp_has_priority_over_hold_exit(self):
        # line already past the pull-in target during the ramp: ramp wins
        state = ControllerState()
        assert takeoff_duty(1.0, 40.0, CFG, state) == CFG.d_max / 3
        assert state.t_c is None


class TestStageIndex:
    def test_zero_wind_is_stage_one(self):
        assert stage_index(0.0, CFG.thresholds) == 1

    def test_boundary_goes_to_upper_band(self):
        assert stage_index(1.5, CFG.thresholds) == 2
        assert stage_index(2.5, CFG.thresholds) == 4
        assert stage_index(6.0, CFG.thresholds) == 7

    def test_above_last_finite_threshold(self):
        assert stage_index(25.0, CFG.thresholds) == 7

    def test_interior_points(self):
        assert stage_index(1.0, CFG.thresholds) == 1
        assert stage_index(1.7, CFG.thresholds) == 2
        assert stage_index(2.2, CFG.thresholds) == 3
        assert stage_index(2.7, CFG.thresholds) == 4
        assert stage_index(3.5, CFG.thresholds) == 5
        assert stage_index(5.0, CFG.thresholds) == 6
        assert stage_index(8.0, CFG.thresholds) == 7


class TestWindHoldUpdate:
    def test_arithmetic_per_stage(self):
        cases = [(1.0, 8.0), (1.7, 5.0), (2.2, 2.0), (2.7, 0.0),
                 (3.5, -2.0), (5.0, -5.0), (8.0, -8.0)]
        for w, delta in cases:
            assert wind_hold_update(50.0, w, CFG) == 50.0 + delta

    def test_zero_band_leaves_duty_unchanged(self):
        assert wind_hold_update(37.0, 2.7, CFG) == 37.0

    def test_example_weak_wind(self):
        assert wind_hold_update(50.0, 1.0, CFG) == 58.0

    def test_upper_clamp(self):
        assert wind_hold_update(98.0, 1.0, CFG) == 100.0

    def test_lower_clamp(self):
        assert wind_hold_update(3.0, 8.0, CFG) == 0.0

    def test_monotone_in_wind_for_fixed_duty(self):
        duties = [wind_hold_update(50.0, w, CFG)
                  for w in (0.5, 1.6, 2.2, 2.7, 3.5, 5.0, 7.0)]
        assert all(b <= a for a, b in zip(duties, duties[1:]))

    @settings(max_examples=200)
    @given(st.lists(st.floats(0.0, 30.0), min_size=1, max_size=50),
           st.floats(0.0, 100.0))
    def test_duty_always_in_range(self, winds, duty0):
        duty = duty0
        for w in winds:
            duty = wind_hold_update(duty, w, CFG)
            assert 0.0 <= duty <= CFG.d_max


class TestReleaseToStation:
    def test_below_target_keeps_releasing(self):
        assert release_to_station(50.0, 100.0) == (RELEASE_DUTY_PCT, False)

    def test_at_target(self):
        duty, reached = release_to_station(100.0, 100.0)
        assert reached

    def test_overshoot_counts_as_reached(self):
        _, reached = release_to_station(120.0, 100.0)
        assert reached


class TestModeMachine:
    def test_forward_chain_allowed(self):
        assert allowed_transition(Mode.IDLE, Mode.TAKEOFF)
        assert allowed_transition(Mode.TAKEOFF, Mode.RELEASE_TO_STATION)
        assert allowed_transition(Mode.RELEASE_TO_STATION, Mode.WIND_HOLD)

    def test_chain_cannot_be_skipped(self):
        assert not allowed_transition(Mode.IDLE, Mode.WIND_HOLD)
        assert not allowed_transition(Mode.TAKEOFF, Mode.WIND_HOLD)
        assert not allowed_transition(Mode.WIND_HOLD, Mode.TAKEOFF)

    def test_manual_reachable_from_anywhere(self):
        for mode in Mode:
            assert allowed_transition(mode, Mode.MANUAL)
            assert allowed_transition(Mode.MANUAL, mode)

    def test_set_mode_rejects_illegal(self):
        state = ControllerState(mode=Mode.IDLE)
        with pytest.raises(ModeTransitionError):
            set_mode(state, Mode.WIND_HOLD, 0.0)

    def test_entering_takeoff_resets_profile(self):
        state = ControllerState(mode=Mode.IDLE, t_c=9.0)
        set_mode(state, Mode.TAKEOFF, 42.0)
        assert state.takeoff_t0 == 42.0
        assert state.t_c is None


class TestControllerTick:
    def test_idle_is_always_zero(self):
        state = ControllerState(mode=Mode.IDLE, duty=55.0)
        assert controller_tick(state, reading(1.0, 5.0), 100.0, CFG, 1.0) == 0.0

    def test_takeoff_dispatch(self):
        state = ControllerState(mode=Mode.TAKEOFF, takeoff_t0=0.0)
        duty = controller_tick(state, reading(CFG.t_u / 2, 0.0), 100.0, CFG,
                               CFG.t_u / 2)
        assert duty == CFG.d_max / 2

    def test_takeoff_chains_to_release_then_hold(self):
        state = ControllerState(mode=Mode.TAKEOFF, takeoff_t0=0.0)
        controller_tick(state, reading(10.0, 0.5), 49.0, CFG, 10.0)  # sets t_c
        controller_tick(state, reading(14.0, 0.5), 49.0, CFG, 14.0)
        assert state.mode is Mode.RELEASE_TO_STATION
        controller_tick(state, reading(15.0, 0.5), 101.0, CFG, 15.0)
        assert state.mode is Mode.WIND_HOLD

    def test_stale_reading_freezes_duty_and_flags(self):
        state = ControllerState(mode=Mode.WIND_HOLD, duty=40.0)
        old = reading(0.0, 1.0)
        duty = controller_tick(state, old, 100.0, CFG, 3 * CFG.period)
        assert duty == 40.0
        assert state.telemetry_loss is True
        # fresh data clears the flag and resumes the law
        duty = controller_tick(state, reading(0.6, 1.0), 100.0, CFG, 0.6)
        assert state.telemetry_loss is False
        assert duty == 48.0

    def test_missing_reading_freezes(self):
        state = ControllerState(mode=Mode.WIND_HOLD, duty=12.0)
        assert controller_tick(state, None, 100.0, CFG, 0.0) == 12.0
        assert state.telemetry_loss

    def test_manual_passthrough(self):
        state = ControllerState(mode=Mode.MANUAL, manual_duty=40.0)
        assert controller_tick(state, reading(1.0, 9.0), 100.0, CFG, 1.0) == 40.0

    def test_manual_clamped_to_d_max(self):
        state = ControllerState(mode=Mode.MANUAL, manual_duty=500.0)
        assert controller_tick(state, reading(1.0, 0.0), 100.0, CFG, 1.0) == CFG.d_max

    def test_wind_hold_uses_combined_speed(self):
        state = ControllerState(mode=Mode.WIND_HOLD, duty=50.0)
        # (3, 4) combines to 5 m/s -> stage 6 -> -5
        duty = controller_tick(state, reading(1.0, 3.0, 4.0), 100.0, CFG, 1.0)
        assert duty == 45.0

    def test_random_stream_never_leaves_range(self):
        rng = random.Random(123)
        state = ControllerState(mode=Mode.WIND_HOLD, duty=30.0)
        t = 0.0
        for _ in range(2000):
            t += CFG.period
            duty = controller_tick(state, reading(t, rng.uniform(0, 12)),
                                   100.0, CFG, t)
            assert 0.0 <= duty <= CFG.d_max
