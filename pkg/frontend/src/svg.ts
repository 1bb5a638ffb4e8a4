/**
 * Minimal deterministic SVG plotting: axes with linear or log-10 scales,
 * point markers, lines, and annotations. String assembly only, so a given
 * input always produces byte-identical output.
 */

export type Scale = "linear" | "log";

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  xScale: Scale;
  yScale: Scale;
  xDomain: [number, number];
  yDomain: [number, number];
}

const FONT = "font-family=\"Menlo, monospace\"";

function fmt(value: number): string {
  if (!Number.isFinite(value)) return "0";
  return value.toFixed(2);
}

export function tickLabel(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 0.01 && magnitude < 10000) {
    return String(Number(value.toPrecision(3)));
  }
  return value.toExponential(1).replace("e", "e");
}

export class Axes {
  private readonly parts: string[] = [];

  constructor(readonly frame: Frame) {}

  private project(value: number, scale: Scale, domain: [number, number],
                  range: [number, number]): number {
    const [lo, hi] = domain;
    let fraction: number;
    if (scale === "log") {
      fraction = (Math.log10(value) - Math.log10(lo)) / (Math.log10(hi) - Math.log10(lo));
    } else {
      fraction = (value - lo) / (hi - lo);
    }
    return range[0] + fraction * (range[1] - range[0]);
  }

  x(value: number): number {
    const { margin, width } = this.frame;
    return this.project(value, this.frame.xScale, this.frame.xDomain,
                        [margin.left, width - margin.right]);
  }

  y(value: number): number {
    const { margin, height } = this.frame;
    return this.project(value, this.frame.yScale, this.frame.yDomain,
                        [height - margin.bottom, margin.top]);
  }

  points(xs: number[], ys: number[], color: string, radius = 2.5): void {
    for (let i = 0; i < xs.length; i++) {
      this.parts.push(
        `<circle cx="${fmt(this.x(xs[i]))}" cy="${fmt(this.y(ys[i]))}" r="${radius}" ` +
        `fill="${color}" fill-opacity="0.75"/>`);
    }
  }

  path(xs: number[], ys: number[], color: string, dash = "", width = 1.5): void {
    const coords = xs.map((x, i) => `${fmt(this.x(x))},${fmt(this.y(ys[i]))}`);
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${coords.join(" ")}" fill="none" stroke="${color}" ` +
      `stroke-width="${width}"${dashAttr}/>`);
  }

  hline(value: number, color: string, dash = "4,3"): void {
    const { margin, width } = this.frame;
    const yy = fmt(this.y(value));
    this.parts.push(
      `<line x1="${margin.left}" y1="${yy}" x2="${width - margin.right}" y2="${yy}" ` +
      `stroke="${color}" stroke-dasharray="${dash}"/>`);
  }

  annotation(lines: string[], color = "#333"): void {
    const { margin } = this.frame;
    lines.forEach((line, i) => {
      this.parts.push(
        `<text x="${margin.left + 8}" y="${margin.top + 14 + 14 * i}" ${FONT} ` +
        `font-size="11" fill="${color}">${escapeXml(line)}</text>`);
    });
  }

  private axisTicks(scale: Scale, domain: [number, number]): number[] {
    if (scale === "log") {
      const lo = Math.ceil(Math.log10(domain[0]) - 1e-9);
      const hi = Math.floor(Math.log10(domain[1]) + 1e-9);
      const ticks: number[] = [];
      for (let k = lo; k <= hi; k++) ticks.push(10 ** k);
      if (ticks.length === 0) ticks.push(domain[0], domain[1]);
      return ticks;
    }
    const ticks: number[] = [];
    for (let i = 0; i <= 4; i++) ticks.push(domain[0] + (i / 4) * (domain[1] - domain[0]));
    return ticks;
  }

  render(title: string, xLabel: string, yLabel: string): string {
    const { width, height, margin } = this.frame;
    const chrome: string[] = [];
    chrome.push(`<rect width="${width}" height="${height}" fill="white"/>`);
    chrome.push(
      `<text x="${width / 2}" y="${margin.top - 8}" text-anchor="middle" ${FONT} ` +
      `font-size="13" fill="#111">${escapeXml(title)}</text>`);
    // axes box
    chrome.push(
      `<rect x="${margin.left}" y="${margin.top}" width="${width - margin.left - margin.right}" ` +
      `height="${height - margin.top - margin.bottom}" fill="none" stroke="#999"/>`);
    for (const tick of this.axisTicks(this.frame.xScale, this.frame.xDomain)) {
      const xx = fmt(this.x(tick));
      chrome.push(`<line x1="${xx}" y1="${height - margin.bottom}" x2="${xx}" ` +
                  `y2="${height - margin.bottom + 4}" stroke="#999"/>`);
      chrome.push(`<text x="${xx}" y="${height - margin.bottom + 16}" text-anchor="middle" ` +
                  `${FONT} font-size="10" fill="#555">${tickLabel(tick)}</text>`);
    }
    for (const tick of this.axisTicks(this.frame.yScale, this.frame.yDomain)) {
      const yy = fmt(this.y(tick));
      chrome.push(`<line x1="${margin.left - 4}" y1="${yy}" x2="${margin.left}" ` +
                  `y2="${yy}" stroke="#999"/>`);
      chrome.push(`<text x="${margin.left - 6}" y="${yy}" text-anchor="end" ` +
                  `dominant-baseline="middle" ${FONT} font-size="10" fill="#555">` +
                  `${tickLabel(tick)}</text>`);
    }
    chrome.push(
      `<text x="${width / 2}" y="${height - 6}" text-anchor="middle" ${FONT} ` +
      `font-size="11" fill="#333">${escapeXml(xLabel)}</text>`);
    chrome.push(
      `<text x="14" y="${height / 2}" text-anchor="middle" ${FONT} font-size="11" ` +
      `fill="#333" transform="rotate(-90 14 ${height / 2})">${escapeXml(yLabel)}</text>`);
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">`,
      ...chrome,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function paddedDomain(values: number[], scale: Scale): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v) && (scale !== "log" || v > 0));
  if (finite.length === 0) throw new Error("no finite values to plot");
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (scale === "log") {
    if (lo === hi) (lo /= 2), (hi *= 2);
    return [lo / 1.3, hi * 1.3];
  }
  if (lo === hi) (lo -= 1), (hi += 1);
  const pad = 0.06 * (hi - lo);
  return [lo - pad, hi + pad];
}
