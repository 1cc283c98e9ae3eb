// Canvas line charts over ring-buffer series. Pure layout math is split
// out so it can be tested without a DOM.

import { RingSeries } from "./ring.js";

export interface ChartLayout {
  width: number;
  height: number;
  padLeft: number;
  padBottom: number;
  padTop: number;
  padRight: number;
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 640,
  height: 220,
  padLeft: 52,
  padBottom: 22,
  padTop: 8,
  padRight: 8,
};

export interface Extent {
  t0: number;
  t1: number;
  v0: number;
  v1: number;
}

const SERIES_COLORS = [
  "#2563eb", "#dc2626", "#16a34a", "#9333ea", "#ea580c", "#0891b2",
];
export const OVERLAY_COLOR = "#64748b";

export function seriesColor(flowId: number): string {
  return SERIES_COLORS[flowId % SERIES_COLORS.length];
}

// Shared extent across every visible series; nulls when nothing to draw.
export function combinedExtent(series: RingSeries[]): Extent | null {
  let t0 = Infinity, t1 = -Infinity, v0 = Infinity, v1 = -Infinity;
  for (const s of series) {
    if (s.length === 0) continue;
    t0 = Math.min(t0, s.at(0)[0]);
    t1 = Math.max(t1, s.at(s.length - 1)[0]);
    const [lo, hi] = s.valueRange();
    v0 = Math.min(v0, lo);
    v1 = Math.max(v1, hi);
  }
  if (!Number.isFinite(t0) || t1 <= t0) return null;
  if (v1 <= v0) v1 = v0 + 1; // flat series still get a band to sit in
  return { t0, t1, v0: Math.min(v0, 0), v1 };
}

export function toPixel(
  t: number,
  v: number,
  extent: Extent,
  layout: ChartLayout,
): [number, number] {
  const plotW = layout.width - layout.padLeft - layout.padRight;
  const plotH = layout.height - layout.padTop - layout.padBottom;
  const x = layout.padLeft + ((t - extent.t0) / (extent.t1 - extent.t0)) * plotW;
  const y = layout.padTop + (1 - (v - extent.v0) / (extent.v1 - extent.v0)) * plotH;
  return [x, y];
}

export class Chart {
  readonly series = new Map<number, RingSeries>(); // flow id -> data
  overlay: RingSeries | null = null; // predicted trace
  overlayVisible = true;

  constructor(
    private canvas: HTMLCanvasElement,
    private title: string,
    private layout: ChartLayout = DEFAULT_LAYOUT,
  ) {
    canvas.width = layout.width;
    canvas.height = layout.height;
  }

  // Unknown flow ids get a fresh series: flows can be added live.
  push(flowId: number, t: number, v: number): void {
    let s = this.series.get(flowId);
    if (!s) {
      s = new RingSeries();
      this.series.set(flowId, s);
    }
    s.push(t, v);
  }

  setOverlay(points: Array<[number, number]>): void {
    const s = new RingSeries(Math.max(points.length, 1));
    for (const [t, v] of points) s.push(t, v);
    this.overlay = s;
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const L = this.layout;
    ctx.clearRect(0, 0, L.width, L.height);
    const visible = [...this.series.values()];
    if (this.overlay && this.overlayVisible) visible.push(this.overlay);
    const extent = combinedExtent(visible);
    ctx.fillStyle = "#334155";
    ctx.font = "12px sans-serif";
    ctx.fillText(this.title, L.padLeft, L.padTop + 10);
    if (!extent) return;

    ctx.strokeStyle = "#cbd5e1";
    ctx.strokeRect(L.padLeft, L.padTop, L.width - L.padLeft - L.padRight,
      L.height - L.padTop - L.padBottom);
    ctx.fillText(extent.v1.toPrecision(3), 2, L.padTop + 10);
    ctx.fillText(extent.v0.toPrecision(3), 2, L.height - L.padBottom);
    ctx.fillText(`${(extent.t0 / 1000).toFixed(0)}s`, L.padLeft, L.height - 6);
    ctx.fillText(`${(extent.t1 / 1000).toFixed(0)}s`, L.width - 40, L.height - 6);

    for (const [flowId, s] of this.series) {
      this.drawSeries(ctx, s, extent, seriesColor(flowId), []);
    }
    if (this.overlay && this.overlayVisible) {
      this.drawSeries(ctx, this.overlay, extent, OVERLAY_COLOR, [4, 3]);
    }
  }

  private drawSeries(
    ctx: CanvasRenderingContext2D,
    s: RingSeries,
    extent: Extent,
    color: string,
    dash: number[],
  ): void {
    if (s.length < 2) return;
    ctx.strokeStyle = color;
    ctx.setLineDash(dash);
    ctx.beginPath();
    for (let i = 0; i < s.length; i++) {
      const [t, v] = s.at(i);
      const [x, y] = toPixel(t, v, extent, this.layout);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
    ctx.stroke();
    ctx.setLineDash([]);
  }
}
