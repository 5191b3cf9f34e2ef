/** Canvas chart renderers: stacked modal shares, satisfaction lines with
 * gaps, stacked decision-count bars, and mutation markers on a shared
 * tick axis. Renderers draw through a minimal structural slice of
 * CanvasRenderingContext2D so tests can record the calls. */

import { downsample } from "./buffer.js";
import { MODES, MODE_COLORS, type MetricsFrame, type ModeLabel } from "./types.js";

export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface ChartArea {
  width: number;
  height: number;
}

export interface TickMarker {
  tick: number;
  label: string;
}

const DECISION_COLORS: Record<string, string> = {
  routine: "#8a8f98",
  biased: "#b06ac9",
  constrained: "#d4683a",
  rational: "#4f9d8f",
};

const PAD = { left: 34, right: 8, top: 8, bottom: 18 };
export const MAX_DRAWN_POINTS = 600;

interface Scale {
  x(tick: number): number;
  y(fraction: number): number;
  plotLeft: number;
  plotRight: number;
  plotTop: number;
  plotBottom: number;
  t0: number;
  t1: number;
}

function makeScale(area: ChartArea, frames: readonly MetricsFrame[]): Scale {
  const plotLeft = PAD.left;
  const plotRight = area.width - PAD.right;
  const plotTop = PAD.top;
  const plotBottom = area.height - PAD.bottom;
  const t0 = frames[0].tick;
  const t1 = Math.max(frames[frames.length - 1].tick, t0 + 1);
  return {
    x: (tick) => plotLeft + ((tick - t0) / (t1 - t0)) * (plotRight - plotLeft),
    y: (fraction) => plotBottom - fraction * (plotBottom - plotTop),
    plotLeft,
    plotRight,
    plotTop,
    plotBottom,
    t0,
    t1,
  };
}

function drawFrame(ctx: Draw2D, area: ChartArea, scale: Scale): void {
  ctx.strokeStyle = "#3c4049";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(scale.plotLeft, scale.plotTop);
  ctx.lineTo(scale.plotLeft, scale.plotBottom);
  ctx.lineTo(scale.plotRight, scale.plotBottom);
  ctx.stroke();
  ctx.fillStyle = "#9aa0ab";
  ctx.font = "10px sans-serif";
  ctx.fillText(String(scale.t0), scale.plotLeft, area.height - 5);
  ctx.fillText(String(scale.t1), scale.plotRight - 24, area.height - 5);
  ctx.fillText("100%", 4, scale.plotTop + 8);
  ctx.fillText("0%", 4, scale.plotBottom);
}

export function drawMarkers(
  ctx: Draw2D,
  scale: Scale,
  markers: readonly TickMarker[],
): void {
  ctx.strokeStyle = "#e8e4d8";
  ctx.lineWidth = 1;
  for (const marker of markers) {
    if (marker.tick < scale.t0 || marker.tick > scale.t1) {
      continue;
    }
    const x = scale.x(marker.tick);
    ctx.globalAlpha = 0.55;
    ctx.beginPath();
    ctx.moveTo(x, scale.plotTop);
    ctx.lineTo(x, scale.plotBottom);
    ctx.stroke();
    ctx.globalAlpha = 1;
    ctx.font = "9px sans-serif";
    ctx.fillStyle = "#e8e4d8";
    ctx.fillText(marker.label, x + 2, scale.plotTop + 9);
  }
}

/** Stacked areas of the four modal shares; the stack always reaches 100%. */
export function renderSharesChart(
  ctx: Draw2D,
  area: ChartArea,
  allFrames: readonly MetricsFrame[],
  markers: readonly TickMarker[] = [],
): void {
  ctx.clearRect(0, 0, area.width, area.height);
  if (allFrames.length === 0) {
    return;
  }
  const frames = downsample(allFrames, MAX_DRAWN_POINTS);
  const scale = makeScale(area, frames);
  let cumulative = frames.map(() => 0);
  for (const mode of MODES) {
    const next = frames.map((f, i) => cumulative[i] + f.modal_share[mode]);
    ctx.fillStyle = MODE_COLORS[mode];
    ctx.globalAlpha = 0.85;
    ctx.beginPath();
    ctx.moveTo(scale.x(frames[0].tick), scale.y(cumulative[0]));
    frames.forEach((f, i) => ctx.lineTo(scale.x(f.tick), scale.y(next[i])));
    for (let i = frames.length - 1; i >= 0; i -= 1) {
      ctx.lineTo(scale.x(frames[i].tick), scale.y(cumulative[i]));
    }
    ctx.closePath();
    ctx.fill();
    ctx.globalAlpha = 1;
    cumulative = next;
  }
  drawFrame(ctx, area, scale);
  drawMarkers(ctx, scale, markers);
}

/** One satisfaction line per mode; a tick where the mode has no users
 * breaks the line instead of plotting zero. */
export function renderSatisfactionChart(
  ctx: Draw2D,
  area: ChartArea,
  allFrames: readonly MetricsFrame[],
  markers: readonly TickMarker[] = [],
): void {
  ctx.clearRect(0, 0, area.width, area.height);
  if (allFrames.length === 0) {
    return;
  }
  const frames = downsample(allFrames, MAX_DRAWN_POINTS);
  const scale = makeScale(area, frames);
  for (const mode of MODES) {
    ctx.strokeStyle = MODE_COLORS[mode];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    let penDown = false;
    for (const frame of frames) {
      const value = frame.satisfaction[mode];
      if (value === null || value === undefined) {
        penDown = false;
        continue;
      }
      const x = scale.x(frame.tick);
      const y = scale.y(value);
      if (penDown) {
        ctx.lineTo(x, y);
      } else {
        ctx.moveTo(x, y);
        penDown = true;
      }
    }
    ctx.stroke();
  }
  drawFrame(ctx, area, scale);
  drawMarkers(ctx, scale, markers);
}

/** Stacked bars of decision counts (routine, biased, constrained,
 * rational), normalized by their per-tick total. */
export function renderDecisionsChart(
  ctx: Draw2D,
  area: ChartArea,
  allFrames: readonly MetricsFrame[],
  markers: readonly TickMarker[] = [],
): void {
  ctx.clearRect(0, 0, area.width, area.height);
  if (allFrames.length === 0) {
    return;
  }
  const frames = downsample(allFrames, MAX_DRAWN_POINTS);
  const scale = makeScale(area, frames);
  const barWidth = Math.max(1, (scale.plotRight - scale.plotLeft) / frames.length - 1);
  for (const frame of frames) {
    const d = frame.decisions;
    const total = Math.max(1, d.routine + d.biased + d.constrained + d.rational);
    const x = scale.x(frame.tick) - barWidth / 2;
    let base = 0;
    for (const key of ["routine", "biased", "constrained", "rational"] as const) {
      const fraction = d[key] / total;
      if (fraction > 0) {
        ctx.fillStyle = DECISION_COLORS[key];
        ctx.fillRect(x, scale.y(base + fraction), barWidth,
          scale.y(base) - scale.y(base + fraction));
      }
      base += fraction;
    }
  }
  drawFrame(ctx, area, scale);
  drawMarkers(ctx, scale, markers);
}

/** Decorative agent grid: one dot per agent, colored by current mode. */
export function renderAgentDots(
  ctx: Draw2D,
  area: ChartArea,
  modes: readonly ModeLabel[],
): void {
  ctx.clearRect(0, 0, area.width, area.height);
  if (modes.length === 0) {
    return;
  }
  const columns = Math.ceil(Math.sqrt(modes.length * (area.width / area.height)));
  const cell = Math.min(area.width / columns, 14);
  modes.forEach((mode, index) => {
    const col = index % columns;
    const row = Math.floor(index / columns);
    ctx.fillStyle = MODE_COLORS[mode];
    ctx.fillRect(col * cell + 1, row * cell + 1, cell - 2, cell - 2);
  });
}
