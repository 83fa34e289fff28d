/** Wire types mirroring the ground-station JSON API. */

export type Mode =
  | "IDLE"
  | "TAKEOFF"
  | "RELEASE_TO_STATION"
  | "WIND_HOLD"
  | "MANUAL";

export const MODES: Mode[] = [
  "IDLE",
  "TAKEOFF",
  "RELEASE_TO_STATION",
  "WIND_HOLD",
  "MANUAL",
];

export interface KiteState {
  x_m: number;
  z_m: number;
  vx_mps: number;
  vz_mps: number;
  tension_n: number;
  airborne: boolean;
}

export interface WinchState {
  duty_pct: number;
  line_out_m: number;
  line_speed_mps: number;
  encoder_m: number;
}

export interface Snapshot {
  t_s: number;
  mode: Mode;
  duty_pct: number;
  wind_mps: number;
  kite: KiteState;
  winch: WinchState;
  seq: number;
  telemetry_loss: boolean;
  finished: boolean;
  run_id: string;
}

export interface CommandResult {
  sent: boolean;
  reason?: string;
  accepted?: boolean;
  detail?: string;
}
