#!/usr/bin/env node
/**
 * Figure generation from isoflow run outputs.
 *
 *   isoflow-figures traces --out traces.svg run1/trajectory.csv [more.csv...]
 *   isoflow-figures final-spectrum --out spec.svg [--no-unsorted] a.csv [b.csv...]
 *   isoflow-figures sphere-grid --out grid.svg r0.png r1.png r2.png r3.png
 *
 * Optional: --label NAME (repeatable, one per input).
 * Exit codes: 0 success, 2 usage/schema error.
 */

import { FigureJob, FigureKind, renderFigure } from "./figures.js";
import { SchemaError } from "./schema.js";

const KINDS: FigureKind[] = ["traces", "final-spectrum", "sphere-grid"];

export function parseArgs(argv: string[]): FigureJob {
  if (argv.length === 0) {
    throw new SchemaError(`usage: isoflow-figures <${KINDS.join("|")}> --out FILE inputs...`);
  }
  const kind = argv[0] as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new SchemaError(`unknown figure kind ${JSON.stringify(argv[0])}; expected one of ${KINDS.join(", ")}`);
  }
  let output = "";
  const labels: string[] = [];
  const inputs: string[] = [];
  let showUnsorted = true;
  for (let i = 1; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--out") {
      output = argv[++i] ?? "";
    } else if (a.startsWith("--out=")) {
      output = a.slice(6);
    } else if (a === "--label") {
      labels.push(argv[++i] ?? "");
    } else if (a.startsWith("--label=")) {
      labels.push(a.slice(8));
    } else if (a === "--no-unsorted") {
      showUnsorted = false;
    } else if (a.startsWith("--")) {
      throw new SchemaError(`unknown option ${a}`);
    } else {
      inputs.push(a);
    }
  }
  if (!output) {
    throw new SchemaError("missing --out FILE");
  }
  if (inputs.length === 0) {
    throw new SchemaError("no input files given");
  }
  return {
    kind,
    inputs,
    output,
    labels: labels.length ? labels : undefined,
    showUnsorted,
  };
}

export function main(argv: string[]): number {
  try {
    const job = parseArgs(argv);
    const out = renderFigure(job);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

import { fileURLToPath } from "node:url";

if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  process.exit(main(process.argv.slice(2)));
}
