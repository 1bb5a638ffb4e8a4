/**
 * Figure assembly: raw series, fitted line, and reference slope on shared
 * axes, with the fit window and r^2 annotated. The fitted line is redrawn
 * from the recorded slope/intercept (natural-log regression); nothing is
 * refitted here.
 */

import { writeFileSync } from "node:fs";
import { basename, join } from "node:path";

import { loadSeries, SeriesRow } from "./csv.js";
import { CheckReport, findCheck, loadReport, Report } from "./report.js";
import { Axes, paddedDomain, Scale } from "./svg.js";

export interface PlotSpec {
  reportPath: string;
  checkName: string;
  outputPath: string;
  /** overlay a dotted y ~ x^slope guide; defaults from the check's parameters */
  referenceSlope?: number;
  axes?: "loglog" | "semilog";
}

interface Style {
  x: keyof SeriesRow;
  y: keyof SeriesRow;
  axes: "loglog" | "semilog";
  xLabel: string;
  yLabel: string;
  fitLine: boolean;     // redraw fits[0] over the (x, y) data
  boundLine: boolean;   // horizontal stability bound from the series
}

const DEFAULT_STYLE: Style = {
  x: "t", y: "ratio", axes: "loglog",
  xLabel: "t", yLabel: "sup ratio", fitLine: false, boundLine: true,
};

const STYLES: Record<string, Partial<Style>> = {
  ondiagonal_decay: {
    y: "quantity", yLabel: "p_t(x0, x0)", fitLine: true, boundLine: false,
  },
  weyl_counting: {
    y: "quantity", xLabel: "lambda", yLabel: "N(lambda)", fitLine: true, boundLine: false,
  },
  offdiagonal_subgaussian: {
    x: "quantity", y: "ratio", axes: "semilog",
    xLabel: "(d^dw / t)^(1/(dw-1))", yLabel: "-log p_t(x,y)/p_t(x,x)",
    fitLine: true, boundLine: false,
  },
  lp_gradient_integral_p1: { y: "quantity", yLabel: "I_p(t)", fitLine: true, boundLine: false },
  lp_gradient_integral_p2: { y: "quantity", yLabel: "I_p(t)", fitLine: true, boundLine: false },
  lp_gradient_integral_p4: { y: "quantity", yLabel: "I_p(t)", fitLine: true, boundLine: false },
};

function styleFor(check: CheckReport, axesOverride?: "loglog" | "semilog"): Style {
  const style = { ...DEFAULT_STYLE, ...(STYLES[check.check_name] ?? {}) };
  if (axesOverride) style.axes = axesOverride;
  return style;
}

function defaultReferenceSlope(check: CheckReport): number | undefined {
  const params = check.parameters;
  if (typeof params.target_slope === "number") return params.target_slope;
  if (typeof params.target_exponent === "number") return -params.target_exponent;
  return undefined;
}

/** Render one check's figure; returns the SVG text written to the spec's path. */
export function render(spec: PlotSpec): string {
  const report = loadReport(spec.reportPath);
  const check = findCheck(report, spec.checkName);
  const seriesPath = join(spec.reportPath, "..", `${spec.checkName}.csv`);
  const rows = loadSeries(seriesPath);
  const svg = renderCheck(check, rows, spec);
  writeFileSync(spec.outputPath, svg, "utf-8");
  return svg;
}

export function renderCheck(check: CheckReport, rows: SeriesRow[], spec: PlotSpec): string {
  const style = styleFor(check, spec.axes);
  const xs = rows.map((r) => r[style.x]);
  const ys = rows.map((r) => r[style.y]);
  const xScale: Scale = "log";
  const yScale: Scale = style.axes === "loglog" ? "log" : "linear";
  const fit = check.fits[0];
  const reference = spec.referenceSlope ?? defaultReferenceSlope(check);

  const yExtra: number[] = [];
  if (style.boundLine) {
    const bounds = rows.map((r) => r.bound).filter((b) => Number.isFinite(b));
    if (bounds.length) yExtra.push(bounds[0]);
  }
  const frame = {
    width: 560, height: 400,
    margin: { top: 34, right: 16, bottom: 44, left: 64 },
    xScale, yScale,
    xDomain: paddedDomain(xs, xScale),
    yDomain: paddedDomain(ys.concat(yExtra), yScale),
  };
  const axes = new Axes(frame);
  axes.points(xs, ys, "#1f77b4");

  const notes: string[] = [];
  if (fit && style.fitLine) {
    drawFitLine(axes, frame.xDomain, fit.slope, fit.intercept, style, "#d62728");
    notes.push(`fit slope=${fit.slope.toFixed(3)}  r2=${fit.r2.toFixed(4)}`);
    notes.push(`window=[${fit.window[0].toExponential(2)}, ${fit.window[1].toExponential(2)}]`
               + `  n=${fit.sample_count}`);
  }
  if (reference !== undefined && style.fitLine && fit) {
    // anchor the guide at the data midpoint so only the slope matters
    drawReference(axes, xs, ys, reference, style, "#2ca02c");
    notes.push(`reference slope=${reference.toFixed(3)}`);
  }
  if (style.boundLine && yExtra.length) {
    axes.hline(yExtra[0], "#888");
    notes.push(`stability bound=${yExtra[0].toExponential(2)}`);
  }
  notes.push(`${check.kind}  level=${check.level}  pass=${check.pass}`);
  axes.annotation(notes);
  return axes.render(`${check.check_name} (m=${check.level})`, style.xLabel, style.yLabel);
}

function drawFitLine(axes: Axes, xDomain: [number, number], slope: number,
                     intercept: number, style: Style, color: string): void {
  const n = 40;
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i <= n; i++) {
    const x = xDomain[0] * (xDomain[1] / xDomain[0]) ** (i / n);
    xs.push(x);
    // log-log fits record ln y = slope ln x + intercept; affine fits
    // (semilog style) record y = slope * x + intercept directly.
    ys.push(style.axes === "loglog" ? Math.exp(intercept) * x ** slope
                                    : slope * x + intercept);
  }
  axes.path(xs, ys, color);
}

function drawReference(axes: Axes, xs: number[], ys: number[], slope: number,
                       style: Style, color: string): void {
  const xMid = Math.exp((Math.log(Math.min(...xs)) + Math.log(Math.max(...xs))) / 2);
  const positives = ys.filter((y) => y > 0);
  if (style.axes !== "loglog" || positives.length === 0) return;
  const yMid = Math.exp(
    positives.reduce((acc, y) => acc + Math.log(y), 0) / positives.length);
  const line = xs.map((x) => yMid * (x / xMid) ** slope);
  axes.path(xs, line, color, "6,4");
}

export interface BatchResult {
  rendered: string[];
  skipped: string[];
}

/** Render every check with a series file; `only` filters by name. */
export function renderAll(reportDir: string, outDir: string,
                          only?: string[]): BatchResult {
  const reportPath = join(reportDir, "report.json");
  const report: Report = loadReport(reportPath);
  const rendered: string[] = [];
  const skipped: string[] = [];
  for (const check of report.checks) {
    if (only && only.length > 0 && !only.includes(check.check_name)) continue;
    const csvPath = join(reportDir, `${check.check_name}.csv`);
    let rows: SeriesRow[];
    try {
      rows = loadSeries(csvPath);
    } catch {
      skipped.push(check.check_name);  // exact checks have no series file
      continue;
    }
    const outputPath = join(outDir, `${check.check_name}.svg`);
    const svg = renderCheck(check, rows, {
      reportPath, checkName: check.check_name, outputPath,
    });
    writeFileSync(outputPath, svg, "utf-8");
    rendered.push(basename(outputPath));
  }
  return { rendered, skipped };
}
