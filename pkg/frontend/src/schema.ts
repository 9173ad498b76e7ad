/**
 * Parsing and validation of the run outputs consumed by the figure
 * scripts.  These are read-only consumers: nothing here recomputes any
 * dynamics, it only checks that files conform to the documented schemas
 * and lifts them into typed records.
 */

import { readFileSync } from "node:fs";

export const TRAJECTORY_COLUMNS = [
  "step",
  "time",
  "offdiag_norm",
  "inversions",
  "lyapunov",
  "spectral_drift",
  "I2",
  "I3",
  "I4",
] as const;

export const FINAL_SPECTRUM_COLUMNS = [
  "index",
  "oracle",
  "final_unsorted",
  "final_sorted",
] as const;

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface TrajectoryData {
  path: string;
  steps: number[];
  /** column name -> values, for the nine fixed columns */
  columns: Map<string, number[]>;
  /** traced diagonal indices, from the diag_<i> columns, in file order */
  tracedIndices: number[];
  /** one series per traced index */
  traces: number[][];
}

export interface FinalSpectrumData {
  path: string;
  oracle: number[];
  finalUnsorted: number[];
  finalSorted: number[];
}

function splitCsv(text: string, path: string): string[][] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty CSV`);
  }
  return lines.map((l) => l.split(","));
}

function parseNumber(raw: string, path: string, line: number): number {
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new SchemaError(`${path}:${line + 2}: non-numeric cell ${JSON.stringify(raw)}`);
  }
  return v;
}

export function readTrajectoryCsv(path: string): TrajectoryData {
  const rows = splitCsv(readFileSync(path, "utf8"), path);
  const header = rows[0];
  const fixed = TRAJECTORY_COLUMNS;
  for (let i = 0; i < fixed.length; i++) {
    if (header[i] !== fixed[i]) {
      throw new SchemaError(
        `${path}: bad trajectory header; expected columns ` +
          `${fixed.join(",")},diag_<i>... but column ${i} is ` +
          `${JSON.stringify(header[i])}`,
      );
    }
  }
  const tracedIndices: number[] = [];
  for (let i = fixed.length; i < header.length; i++) {
    const m = /^diag_(\d+)$/.exec(header[i]);
    if (!m) {
      throw new SchemaError(
        `${path}: trailing column ${JSON.stringify(header[i])} is not diag_<i>`,
      );
    }
    tracedIndices.push(Number(m[1]));
  }
  const body = rows.slice(1);
  const columns = new Map<string, number[]>(fixed.map((c) => [c, []]));
  const traces: number[][] = tracedIndices.map(() => []);
  body.forEach((cells, r) => {
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${path}:${r + 2}: expected ${header.length} cells, got ${cells.length}`,
      );
    }
    fixed.forEach((c, i) => columns.get(c)!.push(parseNumber(cells[i], path, r)));
    tracedIndices.forEach((_, j) =>
      traces[j].push(parseNumber(cells[fixed.length + j], path, r)),
    );
  });
  return {
    path,
    steps: columns.get("step")!,
    columns,
    tracedIndices,
    traces,
  };
}

export function readFinalSpectrumCsv(path: string): FinalSpectrumData {
  const rows = splitCsv(readFileSync(path, "utf8"), path);
  const header = rows[0].join(",");
  const want = FINAL_SPECTRUM_COLUMNS.join(",");
  if (header !== want) {
    throw new SchemaError(
      `${path}: bad final-spectrum header; expected ${JSON.stringify(want)}, ` +
        `got ${JSON.stringify(header)}`,
    );
  }
  const oracle: number[] = [];
  const finalUnsorted: number[] = [];
  const finalSorted: number[] = [];
  rows.slice(1).forEach((cells, r) => {
    if (cells.length !== 4) {
      throw new SchemaError(`${path}:${r + 2}: expected 4 cells, got ${cells.length}`);
    }
    oracle.push(parseNumber(cells[1], path, r));
    finalUnsorted.push(parseNumber(cells[2], path, r));
    finalSorted.push(parseNumber(cells[3], path, r));
  });
  if (oracle.length === 0) {
    throw new SchemaError(`${path}: final-spectrum CSV has no data rows`);
  }
  return { path, oracle, finalUnsorted, finalSorted };
}

const PNG_MAGIC = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

export interface PngInfo {
  path: string;
  width: number;
  height: number;
  data: Buffer;
}

export function readPng(path: string): PngInfo {
  let data: Buffer;
  try {
    data = readFileSync(path);
  } catch (err) {
    throw new SchemaError(`missing raster ${path}`);
  }
  if (data.length < 24 || !data.subarray(0, 8).equals(PNG_MAGIC)) {
    throw new SchemaError(`${path}: not a PNG file`);
  }
  // IHDR is the first chunk: width/height at byte offsets 16/20
  const width = data.readUInt32BE(16);
  const height = data.readUInt32BE(20);
  return { path, width, height, data };
}
