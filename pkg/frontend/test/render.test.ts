import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseSeries } from "../src/csv.js";
import { main } from "../src/cli.js";
import { render, renderAll } from "../src/render.js";
import { findCheck, parseReport, SchemaMismatchError } from "../src/report.js";

const FIT = {
  slope: -0.5882027848941846,
  intercept: -2.0317,
  r2: 0.99935,
  window: [7.901e-6, 1.281e-2],
  sample_count: 25,
};

function makeReport(overrides: Record<string, unknown> = {}): string {
  return JSON.stringify({
    schema: 1,
    code_version: "0.1.0",
    config: { level: 4, seed: 0 },
    solver: { residual_max: 1e-12 },
    checks: [
      {
        check_name: "ondiagonal_decay",
        level: 4,
        kind: "statistical",
        parameters: { x0: 1250, target_slope: -0.59432, slope_tolerance: 0.05 },
        sup_ratio: 0.0061,
        violations: 0,
        tolerance: 0.05,
        fits: [FIT],
        pass: true,
        notes: "",
      },
      {
        check_name: "gradient_bound",
        level: 4,
        kind: "statistical",
        parameters: { c: 2.0, stability: 1.45 },
        sup_ratio: 1.35,
        violations: 0,
        tolerance: 10.0,
        fits: [],
        pass: true,
        notes: "",
      },
    ],
    ...overrides,
  });
}

function makeSeriesCsv(rows: Array<[number, number, number, number]>): string {
  const lines = rows.map((r) => r.join(","));
  return ["t,quantity,ratio,bound", ...lines, ""].join("\n");
}

function fixtureDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "vicsek-plots-"));
  writeFileSync(join(dir, "report.json"), makeReport());
  const ts = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
  writeFileSync(join(dir, "ondiagonal_decay.csv"), makeSeriesCsv(
    ts.map((t) => [t, Math.exp(FIT.intercept) * t ** FIT.slope, 1.0, NaN])));
  writeFileSync(join(dir, "gradient_bound.csv"), makeSeriesCsv(
    ts.map((t) => [t, 0.5, 1.2 + 0.1 * Math.sin(t), 12.0])));
  return dir;
}

describe("report parsing", () => {
  it("accepts schema 1 and finds checks", () => {
    const report = parseReport(makeReport());
    expect(report.checks).toHaveLength(2);
    expect(findCheck(report, "ondiagonal_decay").fits[0].slope).toBeCloseTo(FIT.slope, 12);
  });

  it("fails loudly on a schema mismatch", () => {
    expect(() => parseReport(makeReport({ schema: 2 }))).toThrow(SchemaMismatchError);
    expect(() => parseReport(makeReport({ schema: 2 }))).toThrow(/schema 2/);
    expect(() => parseReport("{}")).toThrow(SchemaMismatchError);
    expect(() => parseReport("not json")).toThrow(SchemaMismatchError);
  });

  it("rejects malformed fits and missing checks", () => {
    const broken = JSON.parse(makeReport());
    broken.checks[0].fits = [{ slope: "fast" }];
    expect(() => parseReport(JSON.stringify(broken))).toThrow(SchemaMismatchError);
    const report = parseReport(makeReport());
    expect(() => findCheck(report, "nonexistent_check")).toThrow(/not present/);
  });
});

describe("series CSV", () => {
  it("parses rows and rejects an empty grid", () => {
    const rows = parseSeries(makeSeriesCsv([[1e-3, 2.0, 3.0, 4.0]]));
    expect(rows).toEqual([{ t: 1e-3, quantity: 2.0, ratio: 3.0, bound: 4.0 }]);
    expect(() => parseSeries("t,quantity,ratio,bound\n")).toThrow(/empty t-grid/);
    expect(() => parseSeries("a,b\n1,2\n")).toThrow(/header/);
    expect(() => parseSeries("t,quantity,ratio,bound\n1,x,3,4\n")).toThrow(/not numeric/);
  });
});

describe("render", () => {
  it("reproduces the fitted slope annotation to 3 decimal places", () => {
    const dir = fixtureDir();
    const out = join(dir, "ondiag.svg");
    const svg = render({
      reportPath: join(dir, "report.json"),
      checkName: "ondiagonal_decay",
      outputPath: out,
    });
    // criterion: annotation equals the JSON slope at 3 decimals
    const expected = `slope=${FIT.slope.toFixed(3)}`;
    expect(expected).toBe("slope=-0.588");
    expect(svg).toContain(expected);
    expect(readFileSync(out, "utf-8")).toBe(svg);
    // r^2, window, and the reference slope are annotated too
    expect(svg).toContain(`r2=${FIT.r2.toFixed(4)}`);
    expect(svg).toContain("window=[7.90e-6, 1.28e-2]");
    expect(svg).toContain("reference slope=-0.594");
  });

  it("is deterministic: rendering twice gives identical bytes", () => {
    const dir = fixtureDir();
    const spec = {
      reportPath: join(dir, "report.json"),
      checkName: "ondiagonal_decay",
      outputPath: join(dir, "a.svg"),
    };
    const first = render(spec);
    const second = render({ ...spec, outputPath: join(dir, "b.svg") });
    expect(second).toBe(first);
    expect(readFileSync(join(dir, "a.svg"))).toEqual(readFileSync(join(dir, "b.svg")));
  });

  it("draws stability plots with the bound line", () => {
    const dir = fixtureDir();
    const svg = render({
      reportPath: join(dir, "report.json"),
      checkName: "gradient_bound",
      outputPath: join(dir, "gb.svg"),
    });
    expect(svg).toContain("stability bound=1.20e+1");
    expect(svg).toContain("sup ratio");
  });

  it("errors on a schema-mismatched report", () => {
    const dir = fixtureDir();
    writeFileSync(join(dir, "report.json"), makeReport({ schema: 99 }));
    expect(() => render({
      reportPath: join(dir, "report.json"),
      checkName: "ondiagonal_decay",
      outputPath: join(dir, "x.svg"),
    })).toThrow(SchemaMismatchError);
  });

  it("errors on an empty series", () => {
    const dir = fixtureDir();
    writeFileSync(join(dir, "ondiagonal_decay.csv"), "t,quantity,ratio,bound\n");
    expect(() => render({
      reportPath: join(dir, "report.json"),
      checkName: "ondiagonal_decay",
      outputPath: join(dir, "x.svg"),
    })).toThrow(/empty t-grid/);
  });
});

describe("batch CLI", () => {
  it("renders every check with series data", () => {
    const dir = fixtureDir();
    const out = join(dir, "figs");
    const status = main(["--report", dir, "--out", out]);
    expect(status).toBe(0);
    const svg = readFileSync(join(out, "ondiagonal_decay.svg"), "utf-8");
    expect(svg).toContain("slope=-0.588");
    expect(readFileSync(join(out, "gradient_bound.svg"), "utf-8")).toContain("sup ratio");
  });

  it("filters with --checks and reports bad directories", () => {
    const dir = fixtureDir();
    const out = join(dir, "figs2");
    expect(main(["--report", dir, "--out", out, "--checks", "gradient_bound"])).toBe(0);
    expect(main(["--report", join(dir, "missing"), "--out", out])).toBe(2);
    expect(main(["--report", dir, "--out", out, "--checks", "nope"])).toBe(2);
  });
});
