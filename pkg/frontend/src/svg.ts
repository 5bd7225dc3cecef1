/**
 * Deterministic SVG line-chart builder: fixed canvas, fixed palette, fixed
 * number formatting, no timestamps, so identical inputs give identical
 * bytes.
 */

export interface Series {
  label: string;
  points: Array<[number, number]>;
  /** optional shaded band around the line: [x, lo, hi] */
  band?: Array<[number, number, number]>;
  dashed?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  yScale: "linear" | "log";
  series: Series[];
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 78, right: 24, top: 44, bottom: 58 };

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

const fmt = (v: number): string => {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
};

const labelFmt = (v: number): string => {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return String(Number(v.toPrecision(4)));
  }
  return v.toExponential(0).replace("+", "");
};

interface Scale {
  (v: number): number;
  ticks: number[];
}

function linearScale(lo: number, hi: number, r0: number, r1: number): Scale {
  if (hi <= lo) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / 5)));
  const mult = span / 5 / step;
  const nice = step * (mult >= 5 ? 10 : mult >= 2 ? 5 : mult >= 1 ? 2 : 1);
  const t0 = Math.ceil(lo / nice) * nice;
  const ticks: number[] = [];
  for (let t = t0; t <= hi + 1e-9 * span; t += nice) {
    ticks.push(Math.abs(t) < 1e-12 * span ? 0 : t);
  }
  const scale = ((v: number) => r0 + ((v - lo) / span) * (r1 - r0)) as Scale;
  scale.ticks = ticks;
  return scale;
}

function logScale(lo: number, hi: number, r0: number, r1: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi <= lo ? lo * 10 : hi);
  const ticks: number[] = [];
  for (let d = Math.ceil(llo - 1e-9); d <= lhi + 1e-9; d += 1) {
    ticks.push(Math.pow(10, d));
  }
  const scale = ((v: number) =>
    r0 + ((Math.log10(v) - llo) / (lhi - llo)) * (r1 - r0)) as Scale;
  scale.ticks = ticks;
  return scale;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

export function buildSvg(spec: ChartSpec): string {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of spec.series) {
    for (const [x, y] of s.points) {
      if (spec.yScale === "log" && y <= 0) continue;
      xs.push(x);
      ys.push(y);
    }
    for (const [x, lo, hi] of s.band ?? []) {
      xs.push(x);
      if (spec.yScale !== "log" || lo > 0) ys.push(lo);
      if (spec.yScale !== "log" || hi > 0) ys.push(hi);
    }
  }
  if (xs.length === 0) {
    throw new Error("no plottable points");
  }
  const [xLo, xHi] = extent(xs);
  let [yLo, yHi] = extent(ys);
  if (spec.yScale === "linear") {
    const pad = 0.05 * (yHi - yLo || 1);
    yLo = Math.min(yLo - pad, 0 <= yLo && yLo < 0.2 * yHi ? 0 : yLo - pad);
    yHi = yHi + pad;
  }
  const sx = linearScale(xLo, xHi, MARGIN.left, WIDTH - MARGIN.right);
  const sy =
    spec.yScale === "log"
      ? logScale(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top)
      : linearScale(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
      `${escapeXml(spec.title)}</text>`,
  );

  // axes, ticks and grid
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  for (const t of sx.ticks) {
    const px = fmt(sx(t));
    parts.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${px}" y="${y0 + 20}" text-anchor="middle" ` +
        `font-size="12">${labelFmt(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const py = fmt(sy(t));
    parts.push(
      `<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${x0 - 8}" y="${py}" text-anchor="end" ` +
        `dominant-baseline="middle" font-size="12">${labelFmt(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" ` +
      `fill="none" stroke="#333333" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle" ` +
      `font-size="14">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="20" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
      `font-size="14" transform="rotate(-90 20 ${(y0 + y1) / 2})">` +
      `${escapeXml(spec.yLabel)}</text>`,
  );

  // bands first so lines draw on top
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const band = (s.band ?? []).filter(
      ([, lo, hi]) => spec.yScale !== "log" || (lo > 0 && hi > 0),
    );
    if (band.length > 1) {
      const upper = band.map(([x, , hi]) => `${fmt(sx(x))},${fmt(sy(hi))}`);
      const lower = band
        .slice()
        .reverse()
        .map(([x, lo]) => `${fmt(sx(x))},${fmt(sy(lo))}`);
      parts.push(
        `<polygon points="${upper.concat(lower).join(" ")}" ` +
          `fill="${color}" fill-opacity="0.15" stroke="none"/>`,
      );
    }
  });
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.points.filter(([, y]) => spec.yScale !== "log" || y > 0);
    if (pts.length === 0) return;
    const coords = pts.map(([x, y]) => `${fmt(sx(x))},${fmt(sy(y))}`);
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<polyline points="${coords.join(" ")}" fill="none" ` +
        `stroke="${color}" stroke-width="2"${dash}/>`,
    );
    if (coords.length <= 64) {
      // per-point markers only for sparse grids, not sampled traces
      for (const c of coords) {
        const [cx, cy] = c.split(",");
        parts.push(`<circle cx="${cx}" cy="${cy}" r="3" fill="${color}"/>`);
      }
    }
  });

  // legend, one entry per series
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const ly = MARGIN.top + 8 + 18 * i;
    const lx = x0 + 12;
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" ` +
        `stroke="${color}" stroke-width="2"${dash} class="legend"/>`,
    );
    parts.push(
      `<text x="${lx + 32}" y="${ly}" font-size="12" ` +
        `dominant-baseline="middle" class="legend">` +
        `${escapeXml(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}
