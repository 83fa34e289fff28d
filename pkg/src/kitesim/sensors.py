"""Flight-unit sensor models: two-axis anemometer, barometric altitude,
GPS position, and IMU pass-through. All functions are pure given an
explicit RNG; pass rng=None for noise-free readings."""
from __future__ import annotations

import math
from dataclasses import dataclass

# Impeller anemometers have very little resistance load but still a small
# startup threshold.
ANEMOMETER_MIN_SPEED = 0.2
ANEMOMETER_NOISE_FRAC = 0.03
ANEMOMETER_NOISE_FLOOR = 0.05

GPS_SIGMA_H = 2.5
GPS_SIGMA_V = 5.0
BARO_SIGMA_PA = 5.0

SEA_LEVEL_PRESSURE = 101325.0
_ISA_SCALE_M = 44330.0
_ISA_EXPONENT = 0.190263
_M_PER_DEG = 111320.0


@dataclass(frozen=True)
class GpsOrigin:
    lat: float
    lon: float
    elevation: float = 0.0
    # compass bearing the downwind x axis points along
    bearing_deg: float = 90.0


@dataclass(frozen=True)
class SensorReading:
    """One synchronized sample of every onboard sensor."""

    t: float
    wind_x: float
    wind_y: float
    pressure: float
    baro_alt: float
    lat: float
    lon: float
    gps_alt: float
    accel: tuple = (0.0, 0.0, 0.0)
    gyro: tuple = (0.0, 0.0, 0.0)


def anemometer_read(apparent, tilt: float = 0.0, rng=None):
    """Decompose the apparent-wind magnitude onto two orthogonal body axes
    rotated by tilt (radians). Axes measure speed, not sign, so both
    outputs are non-negative; magnitudes under the startup threshold read
    (0, 0)."""
    ax, az = apparent
    speed = math.hypot(ax, az)
    if speed < ANEMOMETER_MIN_SPEED:
        return 0.0, 0.0
    angle = math.atan2(az, ax) - tilt
    wx = speed * abs(math.cos(angle))
    wy = speed * abs(math.sin(angle))
    if rng is not None:
        wx = wx * (1.0 + ANEMOMETER_NOISE_FRAC * rng.gauss(0.0, 1.0)) \
            + ANEMOMETER_NOISE_FLOOR * rng.gauss(0.0, 1.0)
        wy = wy * (1.0 + ANEMOMETER_NOISE_FRAC * rng.gauss(0.0, 1.0)) \
            + ANEMOMETER_NOISE_FLOOR * rng.gauss(0.0, 1.0)
    return max(0.0, wx), max(0.0, wy)


def combined_speed(wind_x: float, wind_y: float) -> float:
    """Wind magnitude from the two orthogonal axis speeds; invariant to how
    the apparent wind happens to be split across the axes, which is why the
    controller can ignore body tilt."""
    return math.hypot(wind_x, wind_y)


def pressure_at_altitude(alt: float,
                         ground_pressure: float = SEA_LEVEL_PRESSURE) -> float:
    """Standard-atmosphere pressure at a height above the reference."""
    return ground_pressure * (1.0 - alt / _ISA_SCALE_M) ** (1.0 / _ISA_EXPONENT)


def baro_altitude(pressure: float, ground_pressure: float) -> float:
    """Height above the reference from the standard-atmosphere pressure
    ratio; negative below the reference."""
    return _ISA_SCALE_M * (1.0 - (pressure / ground_pressure) ** _ISA_EXPONENT)


def gps_read(true_x: float, true_z: float, origin: GpsOrigin, rng=None):
    """Project downwind displacement onto the origin bearing with a local
    equirectangular approximation; returns (lat, lon, gps_alt)."""
    b = math.radians(origin.bearing_deg)
    east = true_x * math.sin(b)
    north = true_x * math.cos(b)
    v_err = 0.0
    if rng is not None:
        east += GPS_SIGMA_H * rng.gauss(0.0, 1.0)
        north += GPS_SIGMA_H * rng.gauss(0.0, 1.0)
        v_err = GPS_SIGMA_V * rng.gauss(0.0, 1.0)
    lat = origin.lat + north / _M_PER_DEG
    lon = origin.lon + east / (_M_PER_DEG * math.cos(math.radians(origin.lat)))
    return lat, lon, origin.elevation + true_z + v_err
