/** Command pacing: the controller samples once per 200 ms, so sending
 * faster than that is pointless and the stream contract forbids it. */
export const COMMAND_INTERVAL_MS = 200;

export class RateLimiter {
  private lastAt = -Infinity;

  constructor(private intervalMs: number = COMMAND_INTERVAL_MS) {}

  /** True (and consumes the slot) if a command may be sent at `nowMs`. */
  tryAcquire(nowMs: number): boolean {
    if (nowMs - this.lastAt >= this.intervalMs) {
      this.lastAt = nowMs;
      return true;
    }
    return false;
  }

  msUntilFree(nowMs: number): number {
    return Math.max(0, this.intervalMs - (nowMs - this.lastAt));
  }
}
