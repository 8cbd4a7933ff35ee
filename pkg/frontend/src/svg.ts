/**
 * Self-contained SVG rendering: scales, ticks, step/line paths and legend.
 * Output is a deterministic function of the figure data; every series path
 * carries a `data-points` attribute with the number of plotted samples.
 */

import { FigureData, Point, Series } from "./figures";

export interface RenderOptions {
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { left: 70, right: 18, top: 18, bottom: 48 };
const FONT = "DejaVu Sans, Helvetica, sans-serif";

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a));
    const m = Number((v / 10 ** e).toPrecision(3));
    return `${m}e${e}`;
  }
  return `${Number(v.toPrecision(6))}`;
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = 10 ** Math.floor(Math.log10(raw));
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) return m * mag;
  }
  return 10 * mag;
}

function linearTicks(lo: number, hi: number, target = 6): number[] {
  if (hi <= lo) return [lo];
  const step = niceStep(hi - lo, target);
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); 10 ** e <= hi * (1 + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  return ticks;
}

interface Scale {
  (v: number): number;
  ticks: number[];
}

function makeScale(lo: number, hi: number, pxLo: number, pxHi: number, log: boolean): Scale {
  const tlo = log ? Math.log10(lo) : lo;
  const thi = log ? Math.log10(hi) : hi;
  const span = thi - tlo || 1;
  const f = ((v: number) => {
    const t = log ? Math.log10(Math.max(v, lo)) : v;
    return pxLo + ((t - tlo) / span) * (pxHi - pxLo);
  }) as Scale;
  f.ticks = log ? decadeTicks(lo, hi) : linearTicks(lo, hi);
  return f;
}

function extent(values: number[], fallback: [number, number]): [number, number] {
  if (values.length === 0) return fallback;
  return [Math.min(...values), Math.max(...values)];
}

function px(v: number): string {
  return v.toFixed(2);
}

function seriesPath(s: Series, kind: FigureData["kind"], sx: Scale, sy: Scale, x0: number, x1: number): string {
  if (s.points.length === 0) return "";
  const parts: string[] = [];
  if (kind === "cdf") {
    // step convention: the CDF jumps at every sample
    parts.push(`M ${px(sx(x0))} ${px(sy(0))}`);
    for (const p of s.points) {
      parts.push(`H ${px(sx(p.x))}`, `V ${px(sy(p.y))}`);
    }
    parts.push(`H ${px(sx(x1))}`);
  } else {
    parts.push(
      ...s.points.map(
        (p, i) => `${i === 0 ? "M" : "L"} ${px(sx(p.x))} ${px(sy(p.y))}`,
      ),
    );
  }
  return parts.join(" ");
}

export function renderFigure(fig: FigureData, opts: RenderOptions = {}): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const pts: Point[] = fig.series.flatMap((s) => s.points);

  let [xLo, xHi] = extent(pts.map((p) => p.x), [0, 1]);
  if (fig.kind === "cdf") xLo = Math.min(0, xLo);
  if (xHi <= xLo) xHi = xLo + 1;
  let yLo: number, yHi: number;
  if (fig.kind === "cdf") {
    [yLo, yHi] = [0, 1];
  } else {
    const positive = pts.map((p) => p.y).filter((y) => y > 0);
    const [lo, hi] = extent(positive, [1e-9, 1]);
    yLo = 10 ** Math.floor(Math.log10(lo));
    yHi = 10 ** Math.ceil(Math.log10(hi));
    if (yHi <= yLo) yHi = 10 * yLo;
  }

  const sx = makeScale(xLo, xHi, MARGIN.left, MARGIN.left + plotW, false);
  const sy = makeScale(yLo, yHi, MARGIN.top + plotH, MARGIN.top, fig.logY);

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  );

  // grid and ticks
  for (const t of sx.ticks) {
    const x = px(sx(t));
    out.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#dddddd"/>`,
      `<text x="${x}" y="${MARGIN.top + plotH + 18}" font-family="${FONT}" font-size="12" text-anchor="middle">${fmtTick(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const y = px(sy(t));
    out.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${y}" dy="4" font-family="${FONT}" font-size="12" text-anchor="end">${fmtTick(t)}</text>`,
    );
  }
  out.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" font-family="${FONT}" font-size="14" text-anchor="middle">${fig.xLabel}</text>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" font-family="${FONT}" font-size="14" text-anchor="middle" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${fig.yLabel}</text>`,
  );

  // series
  fig.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const d = seriesPath(s, fig.kind, sx, sy, xLo, xHi);
    if (d !== "") {
      out.push(
        `<path d="${d}" fill="none" stroke="${color}" stroke-width="2" data-series="${s.label}" data-points="${s.points.length}"/>`,
      );
    }
  });

  // legend (top right)
  const legendX = MARGIN.left + plotW - 220;
  fig.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = MARGIN.top + 16 + 18 * i;
    const label = s.diverged && s.points.length === 0 ? `${s.label} (diverged)` : s.label;
    const dash = s.diverged ? ' stroke-dasharray="4 3"' : "";
    out.push(
      `<line x1="${legendX}" y1="${y}" x2="${legendX + 28}" y2="${y}" stroke="${color}" stroke-width="2"${dash}/>`,
      `<text x="${legendX + 34}" y="${y}" dy="4" font-family="${FONT}" font-size="12">${label}</text>`,
    );
  });

  out.push("</svg>");
  return out.join("\n");
}
