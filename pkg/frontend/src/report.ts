/**
 * Typed access to the verification report (wire schema 1).
 *
 * The renderer consumes only these public files; it never recomputes any
 * mathematics. Schema or layout mismatches throw immediately.
 */

import { readFileSync } from "node:fs";

export const SUPPORTED_SCHEMA = 1;

export interface ExponentFit {
  slope: number;
  intercept: number;
  r2: number;
  window: [number, number];
  sample_count: number;
}

export interface CheckReport {
  check_name: string;
  level: number;
  kind: "exact" | "statistical" | "exploratory";
  parameters: Record<string, unknown>;
  sup_ratio: number | null;
  violations: number;
  tolerance: number | null;
  fits: ExponentFit[];
  pass: boolean;
  notes: string;
}

export interface Report {
  schema: number;
  code_version: string;
  config: Record<string, unknown>;
  solver: Record<string, unknown>;
  checks: CheckReport[];
}

export class SchemaMismatchError extends Error {}

function fail(msg: string): never {
  throw new SchemaMismatchError(`report schema mismatch: ${msg}`);
}

function asNumber(value: unknown, where: string): number {
  if (typeof value !== "number" || Number.isNaN(value)) fail(`${where} is not a number`);
  return value;
}

function asFit(raw: unknown, where: string): ExponentFit {
  if (typeof raw !== "object" || raw === null) fail(`${where} is not an object`);
  const fit = raw as Record<string, unknown>;
  const window = fit.window;
  if (!Array.isArray(window) || window.length !== 2) fail(`${where}.window is not a pair`);
  return {
    slope: asNumber(fit.slope, `${where}.slope`),
    intercept: asNumber(fit.intercept, `${where}.intercept`),
    r2: asNumber(fit.r2, `${where}.r2`),
    window: [asNumber(window[0], `${where}.window[0]`), asNumber(window[1], `${where}.window[1]`)],
    sample_count: asNumber(fit.sample_count, `${where}.sample_count`),
  };
}

export function parseReport(text: string): Report {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    fail(`not valid JSON (${(err as Error).message})`);
  }
  if (typeof raw !== "object" || raw === null) fail("top level is not an object");
  const doc = raw as Record<string, unknown>;
  if (doc.schema !== SUPPORTED_SCHEMA) {
    fail(`schema ${JSON.stringify(doc.schema)}, renderer supports ${SUPPORTED_SCHEMA}`);
  }
  if (!Array.isArray(doc.checks)) fail("checks is not an array");
  const checks = doc.checks.map((c, i) => {
    if (typeof c !== "object" || c === null) fail(`checks[${i}] is not an object`);
    const check = c as Record<string, unknown>;
    if (typeof check.check_name !== "string") fail(`checks[${i}].check_name missing`);
    if (typeof check.pass !== "boolean") fail(`checks[${i}].pass missing`);
    const fits = Array.isArray(check.fits)
      ? check.fits.map((f, j) => asFit(f, `checks[${i}].fits[${j}]`))
      : fail(`checks[${i}].fits is not an array`);
    return {
      check_name: check.check_name,
      level: asNumber(check.level ?? 0, `checks[${i}].level`),
      kind: (check.kind ?? "statistical") as CheckReport["kind"],
      parameters: (check.parameters ?? {}) as Record<string, unknown>,
      sup_ratio: typeof check.sup_ratio === "number" ? check.sup_ratio : null,
      violations: typeof check.violations === "number" ? check.violations : 0,
      tolerance: typeof check.tolerance === "number" ? check.tolerance : null,
      fits,
      pass: check.pass,
      notes: typeof check.notes === "string" ? check.notes : "",
    };
  });
  return {
    schema: SUPPORTED_SCHEMA,
    code_version: String(doc.code_version ?? "unknown"),
    config: (doc.config ?? {}) as Record<string, unknown>,
    solver: (doc.solver ?? {}) as Record<string, unknown>,
    checks,
  };
}

export function loadReport(path: string): Report {
  return parseReport(readFileSync(path, "utf-8"));
}

export function findCheck(report: Report, name: string): CheckReport {
  const check = report.checks.find((c) => c.check_name === name);
  if (!check) {
    const known = report.checks.map((c) => c.check_name).join(", ");
    throw new Error(`check ${JSON.stringify(name)} not present in report (have: ${known})`);
  }
  return check;
}
