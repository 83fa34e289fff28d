/** End-to-end check against a real `kite-sim serve` on the flight-6min
 * scenario: the stream carries all four plotted quantities, MANUAL plus
 * lever 40% shows up in the next snapshots, and the lever is refused
 * client-side outside MANUAL. Requires the python package installed
 * (`pip install -e ..`). */
import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { StationClient } from "../src/client.js";
import type { Snapshot } from "../src/types.js";

const PORT = 8773 + (process.pid % 97);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function until<T>(probe: () => Promise<T | null> | T | null,
                        ms = 20000, step = 25): Promise<T> {
  const deadline = Date.now() + ms;
  for (;;) {
    try {
      const value = await probe();
      if (value !== null && value !== undefined && value !== false) {
        return value as T;
      }
    } catch {
      // not ready yet
    }
    if (Date.now() > deadline) throw new Error("timeout");
    await new Promise((r) => setTimeout(r, step));
  }
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "kitesim.cli", "serve", "--scenario", "flight-6min",
     "--bind", `127.0.0.1:${PORT}`, "--speed", "25"],
    { cwd: new URL("..", import.meta.url).pathname, stdio: "ignore" },
  );
  await until(async () => {
    const res = await fetch(`${BASE}/api/state`);
    return res.ok;
  });
}, 30000);

afterAll(() => {
  server?.kill();
});

describe("operator console against a live ground station", () => {
  it("streams all four plotted quantities every tick", async () => {
    const client = new StationClient(BASE);
    const ticks: Snapshot[] = [];
    client.onTick = (s) => ticks.push(s);
    client.start();
    await until(() => ticks.length >= 8);
    client.stop();

    for (const tick of ticks) {
      expect(Number.isFinite(tick.wind_mps)).toBe(true);
      expect(Number.isFinite(tick.kite.z_m)).toBe(true);
      expect(Number.isFinite(tick.winch.line_out_m)).toBe(true);
      expect(Number.isFinite(tick.duty_pct)).toBe(true);
    }
    const t = ticks.map((x) => x.t_s);
    expect(t[t.length - 1]).toBeGreaterThan(t[0]);
  }, 30000);

  it("refuses the lever client-side outside MANUAL, applies it in MANUAL", async () => {
    const client = new StationClient(BASE);
    client.start();
    await until(() => client.last !== null);

    // flight-6min starts in automatic flight, not MANUAL
    expect(client.last?.mode).not.toBe("MANUAL");
    const refused = await client.setLever(40);
    expect(refused.sent).toBe(false);
    expect(refused.reason).toMatch(/MANUAL/);

    // switch to MANUAL (allowed from any mode), reflected in snapshots
    const switched = await until(async () => {
      const result = await client.setMode("MANUAL");
      return result.sent && result.accepted ? result : null;
    });
    expect(switched.accepted).toBe(true);
    await until(() => client.last?.mode === "MANUAL");

    // lever to 40%: the next snapshots report duty 40
    await until(async () => {
      const result = await client.setLever(40);
      return result.sent && result.accepted ? result : null;
    });
    const manualSnap = await until(() =>
      client.last?.mode === "MANUAL" && client.last?.duty_pct === 40
        ? client.last
        : null,
    );
    expect(manualSnap.duty_pct).toBe(40);
    expect(manualSnap.winch.duty_pct).toBe(40);
    client.stop();
  }, 30000);

  it("rejects an illegal mode transition server-side", async () => {
    const client = new StationClient(BASE);
    client.start();
    await until(() => client.last !== null);
    // get into a known automatic mode first: MANUAL -> WIND_HOLD is legal
    await until(async () => {
      const result = await client.setMode("WIND_HOLD");
      return result.sent && result.accepted ? result : null;
    });
    await until(() => client.last?.mode === "WIND_HOLD");
    const result = await until(async () => {
      const r = await client.setMode("TAKEOFF");
      return r.sent ? r : null;
    });
    expect(result.accepted).toBe(false);
    expect(result.detail).toMatch(/cannot switch/);
    client.stop();
  }, 30000);
});
