#!/usr/bin/env node
/**
 * plots --report DIR --out DIR [--checks a,b,c]
 *
 * Reads DIR/report.json plus the per-check CSV series and writes one SVG
 * figure per check into the output directory.
 */

import { existsSync, mkdirSync } from "node:fs";

import { renderAll } from "./render.js";

function usage(): never {
  console.error("usage: plots --report DIR --out DIR [--checks name1,name2]");
  process.exit(2);
}

export function main(argv: string[]): number {
  let reportDir = "";
  let outDir = "";
  let checks: string[] | undefined;
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--report":
        reportDir = argv[++i] ?? usage();
        break;
      case "--out":
        outDir = argv[++i] ?? usage();
        break;
      case "--checks":
        checks = (argv[++i] ?? usage()).split(",").map((s) => s.trim()).filter(Boolean);
        break;
      default:
        usage();
    }
  }
  if (!reportDir || !outDir) usage();
  if (!existsSync(reportDir)) {
    console.error(`error: report directory ${reportDir} does not exist`);
    return 2;
  }
  mkdirSync(outDir, { recursive: true });
  try {
    const { rendered, skipped } = renderAll(reportDir, outDir, checks);
    for (const name of rendered) console.log(`wrote ${outDir}/${name}`);
    if (skipped.length) console.log(`no series data (skipped): ${skipped.join(", ")}`);
    if (checks && rendered.length === 0) {
      console.error("error: none of the requested checks had series data");
      return 2;
    }
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js") ?? false;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
