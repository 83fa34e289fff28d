import { StationClient } from "./client.js";
import { PLOT_SPECS, drawStrip } from "./plots.js";
import { RollingBuffer } from "./state.js";
import { MODES, type Mode, type Snapshot } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const buffer = new RollingBuffer();
const client = new StationClient(window.location.origin);

const banner = $<HTMLDivElement>("banner");
const modeLabel = $<HTMLSpanElement>("mode-label");
const lever = $<HTMLInputElement>("lever");
const leverValue = $<HTMLSpanElement>("lever-value");
const commandNote = $<HTMLSpanElement>("command-note");
const canvases = PLOT_SPECS.map((_, i) => $<HTMLCanvasElement>(`plot-${i}`));

function redraw(): void {
  const series = buffer.series();
  PLOT_SPECS.forEach((spec, i) => drawStrip(canvases[i], series, spec));
}

function applySnapshot(snap: Snapshot): void {
  buffer.push(snap);
  modeLabel.textContent = snap.finished
    ? `${snap.mode} (run finished)`
    : snap.mode;
  for (const btn of document.querySelectorAll<HTMLButtonElement>("[data-mode]")) {
    btn.classList.toggle("active", btn.dataset.mode === snap.mode);
  }
  const manual = snap.mode === "MANUAL";
  lever.disabled = !manual;
  if (!manual) {
    // the lever tracks the authoritative duty when not operator-held
    lever.value = String(Math.round(snap.duty_pct));
  }
  leverValue.textContent = `${snap.duty_pct.toFixed(1)}%`;
  banner.hidden = !(snap.telemetry_loss && !snap.finished);
  redraw();
}

client.onTick = applySnapshot;
client.onStatus = (connected) => {
  $("connection").textContent = connected ? "live" : "reconnecting…";
  $("connection").className = connected ? "ok" : "stale";
  if (!connected) banner.hidden = false;
};

for (const mode of MODES) {
  const btn = document.createElement("button");
  btn.textContent = mode.replace(/_/g, " ");
  btn.dataset.mode = mode;
  btn.addEventListener("click", () => {
    void client.setMode(mode as Mode).then((result) => {
      commandNote.textContent = result.sent
        ? result.accepted
          ? ""
          : `rejected: ${result.detail ?? ""}`
        : (result.reason ?? "");
    });
  });
  $("mode-buttons").appendChild(btn);
}

lever.addEventListener("input", () => {
  leverValue.textContent = `${lever.value}%`;
  client.scheduleLever(Number(lever.value));
});

$<HTMLButtonElement>("apply-table").addEventListener("click", () => {
  const parse = (id: string) =>
    $<HTMLInputElement>(id)
      .value.split(",")
      .map((v) => Number(v.trim()))
      .filter((v) => !Number.isNaN(v));
  void client
    .sendTable(parse("thresholds"), parse("deltas"))
    .then((result) => {
      $("table-note").textContent = result.sent
        ? result.accepted
          ? "applied"
          : `rejected: ${result.detail ?? ""}`
        : (result.reason ?? "");
    });
});

client.start();
redraw();
