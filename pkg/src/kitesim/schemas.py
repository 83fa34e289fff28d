"""Pydantic request/response models for the live ground-station API."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

ModeName = Literal["IDLE", "TAKEOFF", "RELEASE_TO_STATION", "WIND_HOLD",
                   "MANUAL"]


class KiteStateOut(BaseModel):
    x_m: float
    z_m: float
    vx_mps: float
    vz_mps: float
    tension_n: float
    airborne: bool


class WinchStateOut(BaseModel):
    duty_pct: float
    line_out_m: float
    line_speed_mps: float
    encoder_m: float


class StateResponse(BaseModel):
    t_s: float
    mode: ModeName
    duty_pct: float
    wind_mps: float
    kite: KiteStateOut
    winch: WinchStateOut
    seq: int
    telemetry_loss: bool
    finished: bool
    run_id: str


class CommandRequest(BaseModel):
    mode: ModeName
    duty: Optional[float] = Field(default=None, ge=0.0, le=100.0)


class CommandResponse(BaseModel):
    accepted: bool
    detail: str = ""


class ThresholdTableRequest(BaseModel):
    thresholds_mps: list[float] = Field(min_length=2)
    deltas_pct: list[float] = Field(min_length=1)


class RunSummary(BaseModel):
    run_id: str
    created_utc: str
    scenario: str
    duration_s: float
    outcome: dict


class RunsResponse(BaseModel):
    runs: list[RunSummary]
    live_run_id: Optional[str] = None
