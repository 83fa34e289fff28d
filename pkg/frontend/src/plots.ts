import type { Series } from "./state.js";

/** Minimal canvas strip charts for the four flight-log quantities. */

interface PlotSpec {
  label: string;
  color: string;
  pick: (s: Series) => number[];
  floor?: number;
}

export const PLOT_SPECS: PlotSpec[] = [
  { label: "wind m/s", color: "#4fc3f7", pick: (s) => s.wind, floor: 0 },
  { label: "altitude m", color: "#81c784", pick: (s) => s.altitude, floor: 0 },
  { label: "line m", color: "#ffb74d", pick: (s) => s.line, floor: 0 },
  { label: "duty %", color: "#e57373", pick: (s) => s.duty, floor: 0 },
];

export function drawStrip(
  canvas: HTMLCanvasElement,
  series: Series,
  spec: PlotSpec,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#111418";
  ctx.fillRect(0, 0, w, h);

  const ys = spec.pick(series);
  const ts = series.t;
  ctx.fillStyle = "#8899aa";
  ctx.font = "12px system-ui, sans-serif";
  if (ts.length < 2) {
    ctx.fillText(`${spec.label} (waiting for data)`, 8, 16);
    return;
  }

  let lo = spec.floor ?? Math.min(...ys);
  let hi = Math.max(...ys);
  if (hi - lo < 1e-9) hi = lo + 1;
  const t0 = ts[0];
  const t1 = ts[ts.length - 1];
  const span = Math.max(t1 - t0, 1e-9);
  const px = (t: number) => ((t - t0) / span) * (w - 10) + 5;
  const py = (y: number) => h - 18 - ((y - lo) / (hi - lo)) * (h - 30);

  ctx.strokeStyle = "#2a2f36";
  ctx.beginPath();
  ctx.moveTo(5, py(lo));
  ctx.lineTo(w - 5, py(lo));
  ctx.stroke();

  ctx.strokeStyle = spec.color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(px(ts[0]), py(ys[0]));
  for (let i = 1; i < ts.length; i++) {
    ctx.lineTo(px(ts[i]), py(ys[i]));
  }
  ctx.stroke();

  const last = ys[ys.length - 1];
  ctx.fillText(
    `${spec.label}  ${last.toFixed(2)}  [${lo.toFixed(1)}, ${hi.toFixed(1)}]  t=${t1.toFixed(1)}s`,
    8,
    16,
  );
}
