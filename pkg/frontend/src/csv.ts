/** Reader for the per-check series files (columns t,quantity,ratio,bound). */

import { readFileSync } from "node:fs";

export interface SeriesRow {
  t: number;
  quantity: number;
  ratio: number;
  bound: number;
}

const HEADER = "t,quantity,ratio,bound";

export function parseSeries(text: string): SeriesRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0 || lines[0].trim() !== HEADER) {
    throw new Error(`series CSV must start with header "${HEADER}", got ${JSON.stringify(lines[0] ?? "")}`);
  }
  const rows = lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    if (parts.length !== 4) {
      throw new Error(`series row ${i + 1} has ${parts.length} columns, expected 4`);
    }
    const [t, quantity, ratio, bound] = parts.map(Number);
    if ([t, quantity, ratio].some(Number.isNaN)) {
      throw new Error(`series row ${i + 1} is not numeric: ${line}`);
    }
    return { t, quantity, ratio, bound };
  });
  if (rows.length === 0) {
    throw new Error("series CSV has a header but no data rows (empty t-grid)");
  }
  return rows;
}

export function loadSeries(path: string): SeriesRow[] {
  return parseSeries(readFileSync(path, "utf-8"));
}
