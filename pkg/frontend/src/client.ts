import { LineSplitter, parseLines } from "./ndjson.js";
import { RateLimiter } from "./ratelimit.js";
import type { CommandResult, Mode, Snapshot } from "./types.js";

const BACKOFF_MS = [500, 1000, 2000, 4000, 8000];

export interface ClientOptions {
  fetchImpl?: typeof fetch;
  /** scale factor for reconnect backoff (tests set 0) */
  backoffScale?: number;
  commandIntervalMs?: number;
}

/** Ground-station client: one NDJSON stream consumer with reconnect and
 * backoff, plus a serialized command path. Displayed state always comes
 * from received snapshots, never from optimistic local edits. */
export class StationClient {
  onTick: (snap: Snapshot) => void = () => {};
  onStatus: (connected: boolean) => void = () => {};

  private lastSnap: Snapshot | null = null;
  private connectedFlag = false;
  private stopped = true;
  private attempt = 0;
  private abort: AbortController | null = null;
  private limiter: RateLimiter;
  private pendingLever: number | null = null;
  private leverTimer: ReturnType<typeof setTimeout> | null = null;
  private fetchImpl: typeof fetch;
  private backoffScale: number;

  constructor(public baseUrl: string, opts: ClientOptions = {}) {
    this.fetchImpl = opts.fetchImpl ?? fetch.bind(globalThis);
    this.backoffScale = opts.backoffScale ?? 1;
    this.limiter = new RateLimiter(opts.commandIntervalMs);
  }

  get connected(): boolean {
    return this.connectedFlag;
  }

  get last(): Snapshot | null {
    return this.lastSnap;
  }

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    void this.streamLoop();
  }

  stop(): void {
    this.stopped = true;
    this.abort?.abort();
    if (this.leverTimer !== null) clearTimeout(this.leverTimer);
    this.setConnected(false);
  }

  private setConnected(v: boolean): void {
    if (v !== this.connectedFlag) {
      this.connectedFlag = v;
      this.onStatus(v);
    }
  }

  private async streamLoop(): Promise<void> {
    while (!this.stopped) {
      try {
        await this.consumeStream();
      } catch {
        // fall through to reconnect
      }
      this.setConnected(false);
      if (this.stopped) return;
      const delay =
        BACKOFF_MS[Math.min(this.attempt, BACKOFF_MS.length - 1)] *
        this.backoffScale;
      this.attempt += 1;
      await new Promise((resolve) => setTimeout(resolve, delay));
    }
  }

  private async consumeStream(): Promise<void> {
    this.abort = new AbortController();
    const res = await this.fetchImpl(`${this.baseUrl}/api/stream`, {
      signal: this.abort.signal,
    });
    if (!res.ok || !res.body) throw new Error(`stream: http ${res.status}`);
    this.attempt = 0;
    this.setConnected(true);
    const reader = res.body.getReader();
    const decoder = new TextDecoder();
    const splitter = new LineSplitter();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      const lines = splitter.push(decoder.decode(value, { stream: true }));
      for (const snap of parseLines<Snapshot>(lines)) {
        this.lastSnap = snap;
        this.onTick(snap);
      }
    }
  }

  private async post(path: string, body: unknown): Promise<CommandResult> {
    if (!this.limiter.tryAcquire(Date.now())) {
      return { sent: false, reason: "rate limited" };
    }
    try {
      const res = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
      if (!res.ok) {
        let detail = `http ${res.status}`;
        try {
          const parsed = (await res.json()) as { detail?: unknown };
          if (parsed.detail) detail = JSON.stringify(parsed.detail);
        } catch {
          // keep the status text
        }
        return { sent: true, accepted: false, detail };
      }
      const parsed = (await res.json()) as { accepted?: boolean; detail?: string };
      return { sent: true, accepted: parsed.accepted ?? true, detail: parsed.detail };
    } catch (err) {
      return { sent: false, reason: String(err) };
    }
  }

  /** Mode buttons are always sendable; the server enforces transition
   * legality and the UI reflects whatever the next snapshot says. */
  setMode(mode: Mode, duty?: number): Promise<CommandResult> {
    const body: { mode: Mode; duty?: number } = { mode };
    if (duty !== undefined) body.duty = duty;
    return this.post("/api/command", body);
  }

  /** The winch lever only works in MANUAL; anywhere else the command is
   * refused client-side and nothing is sent. */
  setLever(duty: number): Promise<CommandResult> {
    if (this.lastSnap?.mode !== "MANUAL") {
      return Promise.resolve({
        sent: false,
        reason: "lever disabled outside MANUAL",
      });
    }
    return this.setMode("MANUAL", duty);
  }

  /** Coalesce lever drags: at most one command per interval, trailing
   * value wins. */
  scheduleLever(duty: number): void {
    this.pendingLever = duty;
    if (this.leverTimer !== null) return;
    this.leverTimer = setTimeout(() => {
      this.leverTimer = null;
      if (this.pendingLever !== null) {
        const value = this.pendingLever;
        this.pendingLever = null;
        void this.setLever(value);
      }
    }, this.limiter.msUntilFree(Date.now()));
  }

  sendTable(thresholds: number[], deltas: number[]): Promise<CommandResult> {
    return this.post("/api/config", {
      thresholds_mps: thresholds,
      deltas_pct: deltas,
    });
  }

  async fetchState(): Promise<Snapshot> {
    const res = await this.fetchImpl(`${this.baseUrl}/api/state`);
    if (!res.ok) throw new Error(`state: http ${res.status}`);
    return (await res.json()) as Snapshot;
  }
}
