/** Minimal deterministic SVG chart primitives (no runtime dependencies). */

export interface Frame {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface Scale {
  (value: number): number;
  ticks: number[];
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function fmt(v: number): string {
  if (Number.isInteger(v) && Math.abs(v) < 1e7) return String(v);
  if (Math.abs(v) >= 1000 || (Math.abs(v) < 0.01 && v !== 0)) {
    return v.toExponential(1);
  }
  return String(Number(v.toPrecision(3)));
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function logTicks(min: number, max: number): number[] {
  const lo = Math.floor(Math.log10(Math.max(min, 1)));
  const hi = Math.ceil(Math.log10(Math.max(max, 1)));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) ticks.push(Math.pow(10, e));
  return ticks;
}

export function linearScale(
  domainLo: number,
  domainHi: number,
  rangeLo: number,
  rangeHi: number,
  tickCount = 5
): Scale {
  const span = domainHi - domainLo || 1;
  const scale = ((value: number) =>
    rangeLo + ((value - domainLo) / span) * (rangeHi - rangeLo)) as Scale;
  scale.ticks = niceTicks(domainLo, domainHi, tickCount);
  return scale;
}

export function log10Scale(
  domainLo: number,
  domainHi: number,
  rangeLo: number,
  rangeHi: number
): Scale {
  const lo = Math.log10(Math.max(domainLo, 1));
  const hi = Math.log10(Math.max(domainHi, 1));
  const span = hi - lo || 1;
  const scale = ((value: number) =>
    rangeLo +
    ((Math.log10(Math.max(value, 1)) - lo) / span) * (rangeHi - rangeLo)) as Scale;
  scale.ticks = logTicks(domainLo, domainHi).filter(
    (t) => t >= domainLo - 1e-9 && t <= domainHi * (1 + 1e-9)
  );
  return scale;
}

export function polyline(
  points: Array<[number, number]>,
  color: string,
  width = 1.2,
  dash?: string
): string {
  const pts = points.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return (
    `<polyline fill="none" stroke="${color}" stroke-width="${width}"` +
    `${dashAttr} points="${pts}"/>\n`
  );
}

export function bandPolygon(
  upper: Array<[number, number]>,
  lower: Array<[number, number]>,
  color: string,
  opacity = 0.35
): string {
  const ring = [...upper, ...lower.slice().reverse()];
  const pts = ring.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
  return `<polygon fill="${color}" opacity="${opacity}" stroke="none" points="${pts}"/>\n`;
}

export function text(
  x: number,
  y: number,
  label: string,
  opts: { size?: number; anchor?: string; fill?: string; rotate?: boolean } = {}
): string {
  const size = opts.size ?? 8;
  const anchor = opts.anchor ?? "start";
  const fill = opts.fill ?? "#333";
  const transform = opts.rotate
    ? ` transform="rotate(-90,${x.toFixed(1)},${y.toFixed(1)})"`
    : "";
  return (
    `<text x="${x.toFixed(1)}" y="${y.toFixed(1)}" font-size="${size}" ` +
    `text-anchor="${anchor}" fill="${fill}"${transform}>${esc(label)}</text>\n`
  );
}

/** Axes frame with ticks and tick labels for one panel. */
export function axes(
  frame: Frame,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string
): string {
  let s = "";
  const x0 = frame.x;
  const y0 = frame.y + frame.height;
  s += `<rect x="${x0}" y="${frame.y}" width="${frame.width}" height="${frame.height}" fill="none" stroke="#333" stroke-width="0.7"/>\n`;
  for (const t of xScale.ticks) {
    const x = xScale(t);
    s += `<line x1="${x.toFixed(1)}" y1="${y0}" x2="${x.toFixed(1)}" y2="${y0 + 3}" stroke="#333" stroke-width="0.5"/>\n`;
    s += text(x, y0 + 11, fmt(t), { size: 6.5, anchor: "middle", fill: "#555" });
  }
  for (const t of yScale.ticks) {
    const y = yScale(t);
    s += `<line x1="${x0 - 3}" y1="${y.toFixed(1)}" x2="${x0}" y2="${y.toFixed(1)}" stroke="#333" stroke-width="0.5"/>\n`;
    s += text(x0 - 5, y + 2.3, fmt(t), { size: 6.5, anchor: "end", fill: "#555" });
  }
  s += text(x0 + frame.width / 2, y0 + 22, xLabel, { anchor: "middle" });
  s += text(x0 - 34, frame.y + frame.height / 2, yLabel, {
    anchor: "middle",
    rotate: true,
  });
  return s;
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="#fff"/>\n` +
    body +
    `</svg>\n`
  );
}

/** White-to-blue map for modularity in [0, 1]; reds below zero, gray for NaN. */
export function modularityColor(q: number): string {
  if (Number.isNaN(q)) return "#d8d8d8";
  const clamp = Math.max(-1, Math.min(1, q));
  if (clamp >= 0) {
    const t = clamp;
    const channel = (from: number, to: number) => Math.round(from + (to - from) * t);
    return `rgb(${channel(255, 8)},${channel(255, 48)},${channel(255, 107)})`;
  }
  const t = -clamp;
  const channel = (from: number, to: number) => Math.round(from + (to - from) * t);
  return `rgb(${channel(255, 178)},${channel(255, 24)},${channel(255, 43)})`;
}
