"""Fixed-timestep vertical-plane simulation of the kite/flight-unit point
mass on a winch-controlled tether.

Frame: x downwind horizontal, z up, winch anchor at the origin. The tether
is a unilateral spring-damper that only acts when the anchor distance
reaches the paid-out length; the kite is a point mass with fixed lift and
drag coefficients (a single-line kite cannot actuate its posture, so there
is no angle-of-attack dynamic worth modeling).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import PhysicalConstants, WinchParams

# Tether stretch fraction at the reel's rated force; sets spring stiffness.
TETHER_STRAIN_TOL = 1e-3
# Stiffness reference length is floored so short lines stay integrable at
# the default 0.01 s step.
TETHER_MIN_REF_LEN = 20.0
TETHER_DAMPING_RATIO = 0.35
GROUND_EPS = 1e-3

# Lift gain from ground effect: a wing with a 3.2 m span planes measurably
# better within roughly a span of the surface. Without it a point mass
# dragged at the 2.5 m/s reel limit could never unstick, since cruise lift
# is calibrated to exactly balance weight at that speed.
GROUND_EFFECT_GAIN = 0.35
GROUND_EFFECT_HEIGHT_M = 2.0

# The reel never takes the line fully onto the drum.
LINE_MIN_M = 1.0
# Explicit damping is only stable for c*dt/m below ~1; stay well inside.
DAMPING_DT_BOUND = 0.4
# Tension saturates at twice the rated pull (keeps a pathological
# overstretch from injecting unbounded energy in one step).
TENSION_CAP_RATED = 2.0


def ground_effect_factor(z: float) -> float:
    return 1.0 + GROUND_EFFECT_GAIN * math.exp(-max(z, 0.0) / GROUND_EFFECT_HEIGHT_M)


@dataclass(slots=True)
class KiteState:
    """Kite plus instrument package pose and motion, and tether tension."""

    x: float
    z: float
    vx: float = 0.0
    vz: float = 0.0
    tension: float = 0.0
    airborne: bool = False


@dataclass(slots=True)
class WinchState:
    """Reel state: duty is the PWM command driving both motor pull and
    clutch brake strength; line_speed is positive when winding in."""

    duty: float = 0.0
    line_out: float = 100.0
    line_speed: float = 0.0
    encoder_m: float = 0.0


def apparent_wind(state: KiteState, wind_speed: float):
    """Air velocity relative to the kite: (wind - vx, -vz). Returns the
    magnitude and unit direction; direction is (0, 0) in still relative
    air."""
    ax = wind_speed - state.vx
    az = -state.vz
    mag = math.hypot(ax, az)
    if mag < 1e-12:
        return 0.0, (0.0, 0.0)
    return mag, (ax / mag, az / mag)


def aero_forces(apparent, constants: PhysicalConstants):
    """Lift and drag force vectors for a relative air velocity vector.

    Drag points along the apparent wind; lift is perpendicular to it in the
    vertical plane, taking the upward of the two perpendiculars.
    """
    ax, az = apparent
    v2 = ax * ax + az * az
    if v2 < 1e-24:
        return (0.0, 0.0), (0.0, 0.0)
    v = math.sqrt(v2)
    q = 0.5 * constants.air_density * constants.wing_area * v2
    ux, uz = ax / v, az / v
    px, pz = -uz, ux
    if pz < 0.0:
        px, pz = -px, -pz
    cl, cd = constants.lift_coeff, constants.drag_coeff
    return (cl * q * px, cl * q * pz), (cd * q * ux, cd * q * uz)


def calibrate_lift_coeff(constants: PhysicalConstants,
                         target_sustain_wind: float = 2.5) -> float:
    """Lift coefficient at which steady lift carries the kite plus
    instrument package at the given wind speed."""
    if not target_sustain_wind > 0:
        raise ValueError("target_sustain_wind must be positive")
    weight = constants.flight_mass * constants.gravity
    return 2.0 * weight / (constants.air_density * constants.wing_area
                           * target_sustain_wind**2)


def winch_step(winch: WinchState, commanded_duty: float, tension: float,
               dt: float, params: WinchParams = WinchParams(),
               gravity: float = 9.81) -> WinchState:
    """Advance the reel one step.

    Motor pull is duty-proportional up to the rated force. If pull covers
    the tension the line winds in, speed-limited by the take-up rating;
    if tension beats pull plus the duty-scaled brake, the clutch slips
    and line pays out.
    """
    duty = min(max(commanded_duty, 0.0), 100.0)
    pull = duty / 100.0 * params.max_force_kgf * gravity
    if pull >= tension:
        speed = min(params.max_takeup, params.k_motor * (pull - tension))
    else:
        holding = pull + params.static_brake
        if tension > holding:
            speed = -min(params.max_payout, params.k_clutch * (tension - holding))
        else:
            speed = 0.0
    line_out = min(max(winch.line_out - speed * dt, LINE_MIN_M),
                   params.line_capacity)
    moved = winch.line_out - line_out
    return WinchState(
        duty=duty,
        line_out=line_out,
        line_speed=moved / dt,
        encoder_m=winch.encoder_m + abs(moved),
    )


def tether_stiffness(line_out: float, params: WinchParams,
                     gravity: float) -> float:
    ref = max(line_out, TETHER_MIN_REF_LEN)
    return params.max_force_kgf * gravity / (TETHER_STRAIN_TOL * ref)


def step(state: KiteState, winch: WinchState, wind_speed: float, dt: float,
         constants: PhysicalConstants = PhysicalConstants(),
         params: WinchParams = WinchParams(),
         lock_line: bool = False):
    """Semi-implicit Euler update of the whole plant over one physics step.

    Returns new (KiteState, WinchState). The winch acts on the tension
    computed this step; pass lock_line=True to freeze the reel (test rigs
    that clamp the line).
    """
    g = constants.gravity
    m = constants.flight_mass + constants.line_mass_per_m * winch.line_out

    ax_rel = wind_speed - state.vx
    az_rel = -state.vz
    v2 = ax_rel * ax_rel + az_rel * az_rel
    fx = 0.0
    fz = -m * g
    if v2 > 1e-24:
        v = math.sqrt(v2)
        q = 0.5 * constants.air_density * constants.wing_area * v2
        ux, uz = ax_rel / v, az_rel / v
        px, pz = -uz, ux
        if pz < 0.0:
            px, pz = -px, -pz
        lq = constants.lift_coeff * q * ground_effect_factor(state.z)
        dq = constants.drag_coeff * q
        fx += lq * px + dq * ux
        fz += lq * pz + dq * uz

    tension = 0.0
    r = math.hypot(state.x, state.z)
    if r >= winch.line_out and r > 1e-9:
        rx, rz = state.x / r, state.z / r
        stretch = r - winch.line_out
        # winding in (positive line_speed) shortens line_out, so it adds to
        # the stretch rate
        stretch_rate = state.vx * rx + state.vz * rz + winch.line_speed
        k = tether_stiffness(winch.line_out, params, g)
        c = min(2.0 * TETHER_DAMPING_RATIO * math.sqrt(k * m),
                DAMPING_DT_BOUND * m / dt)
        tension = k * stretch + c * stretch_rate
        if tension > 0.0:
            tension = min(tension, TENSION_CAP_RATED * params.max_force_n(g))
            fx -= tension * rx
            fz -= tension * rz
        else:
            tension = 0.0

    vx = state.vx + fx / m * dt
    vz = state.vz + fz / m * dt
    x = state.x + vx * dt
    z = state.z + vz * dt
    if z <= 0.0:
        z = 0.0
        if vz < 0.0:
            vz = 0.0

    new_state = KiteState(x=x, z=z, vx=vx, vz=vz, tension=tension,
                          airborne=z > GROUND_EPS)
    if lock_line:
        new_winch = replace(winch, duty=winch.duty, line_speed=0.0)
    else:
        new_winch = winch_step(winch, winch.duty, tension, dt, params, g)
    return new_state, new_winch


def mechanical_energy(state: KiteState, winch: WinchState,
                      constants: PhysicalConstants,
                      params: WinchParams = WinchParams()) -> float:
    """Kinetic + gravitational + tether strain energy; used by sanity
    checks (dissipation only, no energy sources, in still air with the
    reel idle)."""
    m = constants.flight_mass + constants.line_mass_per_m * winch.line_out
    e = 0.5 * m * (state.vx**2 + state.vz**2) + m * constants.gravity * state.z
    r = math.hypot(state.x, state.z)
    if r > winch.line_out:
        k = tether_stiffness(winch.line_out, params, constants.gravity)
        e += 0.5 * k * (r - winch.line_out) ** 2
    return e
