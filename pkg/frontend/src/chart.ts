// Dependency-free SVG line charts for the monthly evolution-distance
// series. Values are plotted exactly as the server sent them.

import type { SeriesPoint } from "./types.js";

export interface ChartPoint {
  x: number;
  y: number;
  label: string; // "from..to" month pair
}

export function seriesToPoints(series: SeriesPoint[]): ChartPoint[] {
  return series.map(([from, to, distance], index) => ({
    x: index,
    y: distance,
    label: `${from}..${to}`,
  }));
}

export interface ChartGeometry {
  width: number;
  height: number;
  pad: number;
}

export const DEFAULT_GEOMETRY: ChartGeometry = { width: 560, height: 160, pad: 24 };

/** Scale chart points into pixel space; y axis is fixed to [0, 1] because
 * the distances are unit-interval by construction. */
export function toPixels(points: ChartPoint[], geom: ChartGeometry): [number, number][] {
  const { width, height, pad } = geom;
  const span = Math.max(1, points.length - 1);
  return points.map((p) => [
    pad + (p.x / span) * (width - 2 * pad),
    height - pad - p.y * (height - 2 * pad),
  ]);
}

export function linePath(points: ChartPoint[], geom: ChartGeometry = DEFAULT_GEOMETRY): string {
  if (points.length === 0) {
    return "";
  }
  return toPixels(points, geom)
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`)
    .join(" ");
}

export function seriesSvg(
  series: SeriesPoint[],
  title: string,
  geom: ChartGeometry = DEFAULT_GEOMETRY,
): string {
  const points = seriesToPoints(series);
  const path = linePath(points, geom);
  const { width, height, pad } = geom;
  const baseline = height - pad;
  const gridY = [0, 0.5, 1].map((v) => {
    const y = baseline - v * (height - 2 * pad);
    return (
      `<line x1="${pad}" y1="${y}" x2="${width - pad}" y2="${y}" class="grid"/>` +
      `<text x="4" y="${y + 4}" class="tick">${v.toFixed(1)}</text>`
    );
  });
  const markers = toPixels(points, geom)
    .map(([x, y], i) => `<circle cx="${x}" cy="${y}" r="2.5"><title>${points[i].label}: ${points[i].y.toFixed(4)}</title></circle>`)
    .join("");
  const empty = points.length === 0
    ? `<text x="${width / 2}" y="${height / 2}" class="tick">no series (fewer than 2 active months)</text>`
    : "";
  return (
    `<svg viewBox="0 0 ${width} ${height}" class="series-chart" role="img" aria-label="${title}">` +
    `<text x="${pad}" y="14" class="chart-title">${title}</text>` +
    gridY.join("") +
    (path ? `<path d="${path}" class="series-line"/>` : "") +
    markers +
    empty +
    `</svg>`
  );
}

export function factorBarsSvg(
  factors: [string, number][],
  width = 560,
  rowHeight = 22,
): string {
  if (factors.length === 0) {
    return `<svg viewBox="0 0 ${width} ${rowHeight}" class="factor-bars"></svg>`;
  }
  const maxAbs = Math.max(...factors.map(([, v]) => Math.abs(v)), 1e-9);
  const mid = width * 0.55;
  const rows = factors.map(([name, value], i) => {
    const y = i * rowHeight;
    const bar = (Math.abs(value) / maxAbs) * (width * 0.4);
    const x = value >= 0 ? mid : mid - bar;
    const cls = value >= 0 ? "bar-pos" : "bar-neg";
    return (
      `<text x="4" y="${y + 15}" class="factor-name">${name}</text>` +
      `<rect x="${x}" y="${y + 4}" width="${Math.max(bar, 0.5)}" height="${rowHeight - 8}" class="${cls}">` +
      `<title>${name}: ${value.toFixed(4)}</title></rect>`
    );
  });
  const height = factors.length * rowHeight;
  return (
    `<svg viewBox="0 0 ${width} ${height}" class="factor-bars">` +
    `<line x1="${mid}" y1="0" x2="${mid}" y2="${height}" class="grid"/>` +
    rows.join("") +
    `</svg>`
  );
}
