"""Deterministic wind field: power-law vertical shear with scripted
gust/lull events and optional reproducible smooth noise."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

# Below this altitude the shear profile is held constant so the power law
# stays finite and near-ground wind stays realistically weak.
Z_FLOOR = 0.5


@dataclass(frozen=True)
class WindScenario:
    """Horizontal wind speed as a function of altitude and time.

    events are non-overlapping, time-ordered (t_start, t_end, multiplier)
    triples; the multiplier scales the base profile within [t_start, t_end).
    Noise is piecewise-linear interpolation of seeded per-second offsets so
    a 200 ms control loop sees gust ramps, not white noise.
    """

    alpha: float = 0.14
    v_ref: float = 0.0
    z_ref: float = 10.0
    events: tuple = ()
    noise_seed: int = 0
    noise_amplitude: float = 0.0


@lru_cache(maxsize=1 << 16)
def _noise_offset(seed: int, second: int) -> float:
    rng = random.Random((seed * 1000003 + second * 7919) & 0xFFFFFFFF)
    return rng.uniform(-1.0, 1.0)


def event_multiplier(scenario: WindScenario, t: float) -> float:
    for t0, t1, mult in scenario.events:
        if t0 <= t < t1:
            return mult
    return 1.0


def wind_at(scenario: WindScenario, z: float, t: float) -> float:
    """Horizontal wind speed in m/s at altitude z and time t. Deterministic
    for a given (scenario, z, t); never negative."""
    base = scenario.v_ref * (max(z, Z_FLOOR) / scenario.z_ref) ** scenario.alpha
    v = base * event_multiplier(scenario, t)
    if scenario.noise_amplitude > 0.0:
        k = math.floor(t)
        frac = t - k
        a = _noise_offset(scenario.noise_seed, k)
        b = _noise_offset(scenario.noise_seed, k + 1)
        v += scenario.noise_amplitude * (a + (b - a) * frac)
    return v if v > 0.0 else 0.0


def scenario_sweep(scenario: WindScenario, z_min: float, z_max: float,
                   steps: int, t: float = 0.0) -> list[tuple[float, float]]:
    """Sample the profile at `steps` evenly spaced altitudes inclusive of
    both endpoints."""
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not z_min < z_max:
        raise ValueError("z_min must be below z_max")
    dz = (z_max - z_min) / (steps - 1)
    return [(z_min + i * dz, wind_at(scenario, z_min + i * dz, t))
            for i in range(steps)]
