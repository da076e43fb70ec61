/**
 * Chart builders over pipeline CSV rows.
 *
 * - curve grid: one column per topic, top row GCC fraction, bottom row mean
 *   path length, optional gray null band (mean +/- one std per size bin)
 * - lifetime overlay: one panel, one GCC curve per edge-lifetime policy
 * - modularity heatmap and histogram of off-diagonal pair scores
 */

import type { MetricRow, ModularityMatrix, NullBandRow } from "./csv.js";
import {
  Frame,
  Scale,
  axes,
  bandPolygon,
  document,
  fmt,
  linearScale,
  log10Scale,
  modularityColor,
  polyline,
  text,
} from "./svg.js";

export type AxisMode = "nodes" | "month";

export interface CurveGridSpec {
  curves: Array<{ label: string; rows: MetricRow[] }>;
  nullBand?: NullBandRow[];
  axis: AxisMode;
}

const PANEL_W = 170;
const PANEL_H = 130;
const MARGIN_L = 52;
const MARGIN_T = 30;
const GAP_X = 26;
const GAP_Y = 44;

// Overlay palette ordered like the edge-lifetime figures: permanent edges in
// gray, then decreasing lifetime in red, green, blue.
export const OVERLAY_COLORS = ["#8a8a8a", "#d62728", "#2ca02c", "#1f77b4"];

function xValue(row: MetricRow, axis: AxisMode): number {
  return axis === "nodes" ? row.nNodes : row.month;
}

function makeXScale(
  axis: AxisMode,
  lo: number,
  hi: number,
  frame: Frame
): Scale {
  return axis === "nodes"
    ? log10Scale(Math.max(lo, 1), Math.max(hi, 2), frame.x, frame.x + frame.width)
    : linearScale(lo, hi, frame.x, frame.x + frame.width);
}

function panelFrame(col: number, rowIdx: number): Frame {
  return {
    x: MARGIN_L + col * (PANEL_W + GAP_X),
    y: MARGIN_T + rowIdx * (PANEL_H + GAP_Y),
    width: PANEL_W,
    height: PANEL_H,
  };
}

function bandSegments(
  band: NullBandRow[],
  metric: "gcc" | "mpl"
): Array<{ x: number; mean: number; std: number }> {
  const out: Array<{ x: number; mean: number; std: number }> = [];
  for (const row of band) {
    const mean = metric === "gcc" ? row.meanGccFraction : row.meanMpl;
    const std = metric === "gcc" ? row.stdGccFraction : row.stdMpl;
    if (mean === null || std === null) continue;
    out.push({ x: Math.sqrt(row.binLo * row.binHi), mean, std });
  }
  return out.sort((a, b) => a.x - b.x);
}

export function buildCurveGrid(spec: CurveGridSpec): string {
  const nCols = spec.curves.length;
  const width = MARGIN_L + nCols * (PANEL_W + GAP_X) + 8;
  const height = MARGIN_T + 2 * (PANEL_H + GAP_Y) + 4;
  const xLabel = spec.axis === "nodes" ? "Total nodes" : "Month";
  let body = "";

  const metrics: Array<{
    key: "gcc" | "mpl";
    label: string;
    value: (r: MetricRow) => number | null;
  }> = [
    { key: "gcc", label: "GCC fraction", value: (r) => r.gccFraction },
    { key: "mpl", label: "Mean path length", value: (r) => r.meanPathLength },
  ];

  spec.curves.forEach((curve, col) => {
    metrics.forEach((metric, rowIdx) => {
      const frame = panelFrame(col, rowIdx);
      const xs = curve.rows.map((r) => xValue(r, spec.axis));
      const band = spec.nullBand ? bandSegments(spec.nullBand, metric.key) : [];
      const xLo = Math.min(...xs, ...(band.length ? [band[0].x] : []));
      const xHi = Math.max(...xs, ...(band.length ? [band[band.length - 1].x] : []));
      const xScale = makeXScale(spec.axis, xLo, xHi, frame);

      const yValues = curve.rows
        .map((r) => metric.value(r))
        .filter((v): v is number => v !== null);
      const bandHi = band.map((b) => b.mean + b.std);
      const yHi = Math.max(...yValues, ...(bandHi.length ? bandHi : [0]), 0.001);
      const yScale = linearScale(
        0,
        yHi * 1.06,
        frame.y + frame.height,
        frame.y,
        4
      );

      body += `<g class="panel">\n`;
      if (band.length >= 2) {
        body += bandPolygon(
          band.map((b) => [xScale(b.x), yScale(b.mean + b.std)]),
          band.map((b) => [xScale(b.x), yScale(Math.max(b.mean - b.std, 0))]),
          "#bbbbbb"
        );
      }
      const points: Array<[number, number]> = [];
      for (const row of curve.rows) {
        const v = metric.value(row);
        if (v === null) continue;
        points.push([xScale(xValue(row, spec.axis)), yScale(v)]);
      }
      if (points.length) body += polyline(points, "#1f77b4", 1.3);
      body += axes(frame, xScale, yScale, xLabel, metric.label);
      if (rowIdx === 0) {
        body += text(frame.x + frame.width / 2, frame.y - 8, curve.label, {
          anchor: "middle",
          size: 9,
        });
      }
      body += `</g>\n`;
    });
  });
  return document(width, height, body);
}

export interface OverlaySpec {
  curves: Array<{ label: string; rows: MetricRow[] }>;
  axis: AxisMode;
  metric?: "fraction" | "count";
}

export function buildOverlay(spec: OverlaySpec): string {
  const frame: Frame = { x: 64, y: 34, width: 330, height: 210 };
  const width = frame.x + frame.width + 120;
  const height = frame.y + frame.height + 48;
  const useFraction = (spec.metric ?? "fraction") === "fraction";
  const value = (r: MetricRow) => (useFraction ? r.gccFraction : r.gccNodes);
  const xLabel = spec.axis === "nodes" ? "Total nodes" : "Month";
  const yLabel = useFraction ? "GCC fraction" : "GCC nodes";

  const allRows = spec.curves.flatMap((c) => c.rows);
  const xs = allRows.map((r) => xValue(r, spec.axis));
  const xScale = makeXScale(spec.axis, Math.min(...xs), Math.max(...xs), frame);
  const yHi = Math.max(...allRows.map(value), 0.001);
  const yScale = linearScale(0, yHi * 1.06, frame.y + frame.height, frame.y, 4);

  let body = `<g class="panel">\n`;
  spec.curves.forEach((curve, i) => {
    const color = OVERLAY_COLORS[i % OVERLAY_COLORS.length];
    body += polyline(
      curve.rows.map((r) => [xScale(xValue(r, spec.axis)), yScale(value(r))]),
      color,
      1.4
    );
  });
  body += axes(frame, xScale, yScale, xLabel, yLabel);
  spec.curves.forEach((curve, i) => {
    const color = OVERLAY_COLORS[i % OVERLAY_COLORS.length];
    const ly = frame.y + 12 + i * 13;
    const lx = frame.x + frame.width + 12;
    body += `<line x1="${lx}" y1="${ly}" x2="${lx + 16}" y2="${ly}" stroke="${color}" stroke-width="1.6"/>\n`;
    body += text(lx + 20, ly + 3, curve.label, { size: 7.5 });
  });
  body += `</g>\n`;
  return document(width, height, body);
}

export function buildHeatmap(matrix: ModularityMatrix): string {
  const k = matrix.topics.length;
  const cell = Math.max(10, Math.min(26, Math.floor(360 / Math.max(k, 1))));
  const originX = 56;
  const originY = 40;
  const width = originX + k * cell + 90;
  const height = originY + k * cell + 56;
  let body = text(originX, 18, "Pairwise modularity (Q/Qmax)", { size: 10 });
  for (let i = 0; i < k; i++) {
    for (let j = 0; j < k; j++) {
      const q = matrix.values[i][j];
      const x = originX + j * cell;
      const y = originY + i * cell;
      const title = `topics ${matrix.topics[i]},${matrix.topics[j]}: ${
        Number.isNaN(q) ? "n/a" : fmt(q)
      }`;
      body +=
        `<rect x="${x}" y="${y}" width="${cell}" height="${cell}" ` +
        `fill="${modularityColor(q)}" stroke="#fff" stroke-width="0.5">` +
        `<title>${title}</title></rect>\n`;
    }
  }
  for (let i = 0; i < k; i++) {
    body += text(originX - 5, originY + i * cell + cell / 2 + 2.5, String(matrix.topics[i]), {
      size: 7,
      anchor: "end",
    });
    body += text(originX + i * cell + cell / 2, originY + k * cell + 10, String(matrix.topics[i]), {
      size: 7,
      anchor: "middle",
    });
  }
  // color key
  const keyX = originX + k * cell + 18;
  for (let s = 0; s <= 20; s++) {
    const q = 1 - s / 20;
    body += `<rect x="${keyX}" y="${originY + (s * k * cell) / 21}" width="10" height="${(k * cell) / 21 + 0.5}" fill="${modularityColor(q)}"/>\n`;
  }
  body += text(keyX + 14, originY + 6, "1", { size: 7 });
  body += text(keyX + 14, originY + k * cell, "0", { size: 7 });
  return document(width, height, body);
}

export interface HistogramBin {
  lo: number;
  hi: number;
  count: number;
}

/** Off-diagonal unordered pair scores, fixed 0.05-wide bins. */
export function histogramBins(matrix: ModularityMatrix, binWidth = 0.05): HistogramBin[] {
  const values: number[] = [];
  for (let i = 0; i < matrix.topics.length; i++) {
    for (let j = i + 1; j < matrix.topics.length; j++) {
      const q = matrix.values[i][j];
      if (!Number.isNaN(q)) values.push(q);
    }
  }
  if (!values.length) return [];
  const lo = Math.floor(Math.min(...values, 0) / binWidth) * binWidth;
  const nBins = Math.max(1, Math.round((1 - lo) / binWidth));
  const bins: HistogramBin[] = [];
  for (let b = 0; b < nBins; b++) {
    bins.push({ lo: lo + b * binWidth, hi: lo + (b + 1) * binWidth, count: 0 });
  }
  for (const v of values) {
    let idx = Math.floor((v - lo) / binWidth);
    if (idx >= nBins) idx = nBins - 1; // q == 1 lands in the last bin
    if (idx < 0) idx = 0;
    bins[idx].count += 1;
  }
  return bins;
}

export function buildHistogram(matrix: ModularityMatrix): string {
  const bins = histogramBins(matrix);
  const frame: Frame = { x: 56, y: 30, width: 330, height: 200 };
  const width = frame.x + frame.width + 24;
  const height = frame.y + frame.height + 50;
  if (!bins.length) {
    return document(width, height, text(frame.x, frame.y, "no off-diagonal scores"));
  }
  const xScale = linearScale(
    bins[0].lo,
    bins[bins.length - 1].hi,
    frame.x,
    frame.x + frame.width
  );
  const maxCount = Math.max(...bins.map((b) => b.count));
  const yScale = linearScale(0, maxCount * 1.08, frame.y + frame.height, frame.y, 4);
  let body = text(frame.x, 16, "Histogram of pairwise modularity scores", {
    size: 10,
  });
  body += `<g class="panel">\n`;
  for (const bin of bins) {
    const x0 = xScale(bin.lo);
    const x1 = xScale(bin.hi);
    const y = yScale(bin.count);
    const h = frame.y + frame.height - y;
    body +=
      `<rect x="${x0.toFixed(1)}" y="${y.toFixed(1)}" width="${(x1 - x0).toFixed(1)}" ` +
      `height="${h.toFixed(1)}" fill="#1f77b4" stroke="#fff" stroke-width="0.5"/>\n`;
  }
  body += axes(frame, xScale, yScale, "Q/Qmax", "Pairs");
  body += `</g>\n`;
  return document(width, height, body);
}
