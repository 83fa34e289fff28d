import type { Snapshot } from "./types.js";

/** Rolling window of telemetry ticks for the live plots. The console never
 * invents values: everything here arrived in a snapshot. */
export const WINDOW_S = 360;

export interface Series {
  t: number[];
  wind: number[];
  altitude: number[];
  line: number[];
  duty: number[];
}

export class RollingBuffer {
  private snaps: Snapshot[] = [];

  constructor(private windowS: number = WINDOW_S) {}

  get latest(): Snapshot | null {
    return this.snaps.length ? this.snaps[this.snaps.length - 1] : null;
  }

  get size(): number {
    return this.snaps.length;
  }

  push(snap: Snapshot): void {
    const last = this.latest;
    if (last && snap.t_s < last.t_s) {
      // run restarted on the server: drop stale history
      this.snaps = [];
    }
    this.snaps.push(snap);
    const cutoff = snap.t_s - this.windowS;
    let first = 0;
    while (first < this.snaps.length && this.snaps[first].t_s < cutoff) {
      first += 1;
    }
    if (first > 0) {
      this.snaps = this.snaps.slice(first);
    }
  }

  series(): Series {
    const s: Series = { t: [], wind: [], altitude: [], line: [], duty: [] };
    for (const snap of this.snaps) {
      s.t.push(snap.t_s);
      s.wind.push(snap.wind_mps);
      s.altitude.push(snap.kite.z_m);
      s.line.push(snap.winch.line_out_m);
      s.duty.push(snap.duty_pct);
    }
    return s;
  }
}
