"""Black-box tuning of the wind-hold threshold table against scripted wind
scenarios.

The objective is piecewise-constant in the thresholds (a candidate only
changes behavior when a boundary crosses an observed wind speed), so the
search is derivative-free: coordinate descent over the deltas, then the
interior thresholds, tried at a ladder of step scales so plateaus wider
than one step still get crossed.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

from .config import Config, ControllerConfig, validate_config
from .scenarios import ScenarioSpec
from .station import ALOFT_ALT_M, SimulationRun

LAMBDA_EFFORT = 0.1
DELTA_SCALES = (16.0, 8.0, 4.0, 2.0, 1.0)
THRESHOLD_SCALES = (1.6, 0.8, 0.4, 0.2)
THRESHOLD_GAP = 0.05


@dataclass(frozen=True)
class FlightMetrics:
    time_aloft_fraction: float
    mean_altitude: float
    altitude_variance: float
    line_travel: float
    crashed: bool


def evaluate(config: Config, scenario: ScenarioSpec, seed: int = 0) -> FlightMetrics:
    """Run the closed loop and reduce the log to flight metrics."""
    run = SimulationRun(config, scenario, seed=seed)
    records = run.run()
    n = len(records)
    alts = [r.altitude for r in records]
    aloft = sum(1 for a in alts if a > ALOFT_ALT_M)
    mean_alt = sum(alts) / n
    var_alt = sum((a - mean_alt) ** 2 for a in alts) / n
    return FlightMetrics(
        time_aloft_fraction=aloft / n,
        mean_altitude=mean_alt,
        altitude_variance=var_alt,
        line_travel=run.winch.encoder_m,
        crashed=run.max_altitude > 1.0 and alts[-1] <= ALOFT_ALT_M,
    )


def scalar_objective(metrics: FlightMetrics, duration: float,
                     max_takeup: float, lam: float = LAMBDA_EFFORT) -> float:
    """Time aloft minus an actuation-effort penalty; line travel is
    normalized by the most the reel could move over the run."""
    normalizer = max(duration * max_takeup, 1e-9)
    return metrics.time_aloft_fraction - lam * metrics.line_travel / normalizer


def table_hash(controller: ControllerConfig) -> str:
    blob = json.dumps([list(controller.thresholds[:-1]),
                       list(controller.deltas)])
    return hashlib.sha256(blob.encode()).hexdigest()[:10]


@dataclass(frozen=True)
class EvalRecord:
    index: int
    objective: float
    config_hash: str


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    @property
    def exhausted(self):
        return self.used >= self.limit


def _suite_objective(config, scenarios, seed, budget, history):
    total = 0.0
    for sc in scenarios:
        m = evaluate(config, sc, seed)
        total += scalar_objective(m, sc.duration, config.winch.max_takeup)
    budget.used += 1
    obj = total / len(scenarios)
    history.append(EvalRecord(budget.used, obj,
                              table_hash(config.controller)))
    return obj


def _with_delta(config, i, value):
    ctrl = config.controller
    deltas = list(ctrl.deltas)
    # keep the table non-increasing by clamping against the neighbors
    hi = deltas[i - 1] if i > 0 else math.inf
    lo = deltas[i + 1] if i + 1 < len(deltas) else -math.inf
    deltas[i] = min(max(value, lo), hi)
    return replace(config, controller=replace(ctrl, deltas=tuple(deltas)))


def _with_threshold(config, i, value):
    ctrl = config.controller
    thr = list(ctrl.thresholds)
    lo = thr[i - 1] + THRESHOLD_GAP
    hi = thr[i + 1] - THRESHOLD_GAP if not math.isinf(thr[i + 1]) else math.inf
    if hi < lo:
        return None
    thr[i] = min(max(value, lo), hi)
    return replace(config, controller=replace(ctrl, thresholds=tuple(thr)))


def optimize(config: Config, scenarios, budget: int, seed: int = 0):
    """Coordinate search over the duty deltas then interior thresholds.
    Every candidate satisfies the controller-config invariants; returns
    (best config, history of (index, objective, table hash))."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    history: list[EvalRecord] = []
    b = _Budget(budget)
    best_cfg = config
    best_obj = _suite_objective(config, scenarios, seed, b, history)

    n_deltas = len(config.controller.deltas)
    n_thr = len(config.controller.thresholds)

    def try_candidate(candidate):
        nonlocal best_cfg, best_obj
        if candidate is None or b.exhausted:
            return False
        if validate_config(candidate):
            return False
        obj = _suite_objective(candidate, scenarios, seed, b, history)
        if obj > best_obj:
            best_cfg, best_obj = candidate, obj
            return True
        return False

    for scale in DELTA_SCALES:
        for i in range(n_deltas):
            if b.exhausted:
                break
            base = best_cfg.controller.deltas[i]
            if not try_candidate(_with_delta(best_cfg, i, base + scale)):
                try_candidate(_with_delta(best_cfg, i, base - scale))
    for scale in THRESHOLD_SCALES:
        for i in range(1, n_thr - 1):  # band edges between 0 and +inf
            if b.exhausted:
                break
            base = best_cfg.controller.thresholds[i]
            if not try_candidate(_with_threshold(best_cfg, i, base + scale)):
                try_candidate(_with_threshold(best_cfg, i, base - scale))

    # best-so-far trace must be monotone for reporting
    running = -math.inf
    mono = []
    for rec in history:
        running = max(running, rec.objective)
        mono.append(EvalRecord(rec.index, running, rec.config_hash))
    return best_cfg, history, mono


def history_csv(history) -> str:
    lines = ["eval_index,objective,config_hash"]
    for rec in history:
        lines.append(f"{rec.index},{rec.objective!r},{rec.config_hash}")
    return "\n".join(lines) + "\n"
