/**
 * The three figure kinds built from run outputs:
 *
 *   traces          one panel per trajectory CSV, traced diagonal entries
 *                   against the step index
 *   final-spectrum  overlay of the oracle spectrum with each run's final
 *                   diagonal (sorted index on the x axis), plus the raw
 *                   unsorted diagonal as scatter
 *   sphere-grid     2x2 composite of four raster snapshots with captions
 *
 * Outputs are standalone SVG files; sphere-grid embeds the PNGs.
 */

import { writeFileSync } from "node:fs";
import { basename, dirname } from "node:path";

import {
  FinalSpectrumData,
  readFinalSpectrumCsv,
  readPng,
  readTrajectoryCsv,
  SchemaError,
} from "./schema.js";
import { mergeStyle, Style } from "./style.js";
import { escapeText, extentOf, Panel, svgDocument } from "./svg.js";

export type FigureKind = "traces" | "final-spectrum" | "sphere-grid";

export interface FigureJob {
  kind: FigureKind;
  inputs: string[];
  output: string;
  /** panel / caption labels, one per input; defaults derived from paths */
  labels?: string[];
  style?: Partial<Style>;
  /** final-spectrum only: also scatter the raw unsorted diagonals */
  showUnsorted?: boolean;
}

function labelFor(job: FigureJob, i: number): string {
  if (job.labels && job.labels[i] !== undefined) return job.labels[i];
  const p = job.inputs[i];
  const dir = basename(dirname(p));
  return dir === "." || dir === "" ? basename(p) : dir;
}

export function plotTraces(job: FigureJob): string {
  if (job.inputs.length === 0) {
    throw new SchemaError("traces figure needs at least one trajectory CSV");
  }
  const style = mergeStyle(job.style);
  const data = job.inputs.map(readTrajectoryCsv);
  for (const d of data) {
    if (d.tracedIndices.length === 0) {
      throw new SchemaError(
        `${d.path}: no diag_<i> trace columns; expected the trajectory ` +
          "schema step,time,offdiag_norm,inversions,lyapunov,spectral_drift," +
          "I2,I3,I4,diag_<i>...",
      );
    }
  }
  const m = style.margin;
  const panelW = style.width - m.left - m.right;
  const height = data.length * (style.panelHeight + m.top + m.bottom);
  const body: string[] = [];
  data.forEach((d, p) => {
    const y0 = m.top + p * (style.panelHeight + m.top + m.bottom);
    const xext = extentOf(d.steps, 0.02);
    const yext = extentOf(d.traces.flat());
    const panel = new Panel(style, m.left, y0, panelW, style.panelHeight, xext, yext);
    panel.frame(labelFor(job, p), "step", "diagonal entry");
    d.traces.forEach((series, j) => {
      panel.line(d.steps, series, style.palette[j % style.palette.length]);
    });
    panel.legend(
      d.tracedIndices.map((idx, j) => ({
        label: `diag_${idx}`,
        color: style.palette[j % style.palette.length],
      })),
    );
    body.push(...panel.parts);
  });
  const doc = svgDocument(style.width, height, style.background, body);
  writeFileSync(job.output, doc);
  return job.output;
}

export function plotFinalSpectrum(job: FigureJob): string {
  if (job.inputs.length === 0) {
    throw new SchemaError("final-spectrum figure needs at least one CSV");
  }
  const style = mergeStyle(job.style);
  const data: FinalSpectrumData[] = job.inputs.map(readFinalSpectrumCsv);
  const n = data[0].oracle.length;
  for (const d of data) {
    if (d.oracle.length !== n) {
      throw new SchemaError(
        `${d.path}: ${d.oracle.length} rows but ${data[0].path} has ${n}`,
      );
    }
  }
  const m = style.margin;
  const panelW = style.width - m.left - m.right;
  const idx = Array.from({ length: n }, (_, i) => i);
  const all = data.flatMap((d) => [...d.finalSorted, ...(job.showUnsorted === false ? [] : d.finalUnsorted)]);
  all.push(...data[0].oracle);
  const panel = new Panel(
    style,
    m.left,
    m.top,
    panelW,
    style.panelHeight,
    extentOf(idx, 0.02),
    extentOf(all),
  );
  panel.frame("final diagonal vs exact spectrum", "sorted index", "eigenvalue");
  if (job.showUnsorted !== false) {
    data.forEach((d) => {
      d.finalUnsorted.forEach((v, i) => panel.dot(i, v, style.scatterColor, 1.6));
    });
  }
  panel.line(idx, data[0].oracle, style.oracleColor, 2.2);
  const legend = [{ label: "oracle spectrum", color: style.oracleColor }];
  data.forEach((d, k) => {
    const color = style.palette[k % style.palette.length];
    panel.line(idx, d.finalSorted, color);
    legend.push({ label: `${labelFor(job, k)} (sorted)`, color });
  });
  if (job.showUnsorted !== false) {
    legend.push({ label: "raw diagonal", color: style.scatterColor });
  }
  panel.legend(legend);
  const doc = svgDocument(
    style.width,
    style.panelHeight + m.top + m.bottom,
    style.background,
    panel.parts,
  );
  writeFileSync(job.output, doc);
  return job.output;
}

const GRID_CAPTIONS = [
  "Initial time",
  "First intermediate time",
  "Second intermediate time",
  "Final time",
];

export function plotSphereGrid(job: FigureJob): string {
  if (job.inputs.length !== 4) {
    throw new SchemaError(
      `sphere-grid figure needs exactly four rasters, got ${job.inputs.length}`,
    );
  }
  const style = mergeStyle(job.style);
  const pngs = job.inputs.map(readPng);
  const cellW = Math.floor((style.width - 3 * 16) / 2);
  const gap = 16;
  const captionH = 24;
  const body: string[] = [];
  let maxBottom = 0;
  pngs.forEach((png, i) => {
    const row = Math.floor(i / 2);
    const col = i % 2;
    const drawH = Math.round((png.height / png.width) * cellW);
    const x = gap + col * (cellW + gap);
    const y = gap + row * (drawH + captionH + gap);
    const caption = job.labels?.[i] ?? GRID_CAPTIONS[i];
    body.push(
      `<image x="${x}" y="${y}" width="${cellW}" height="${drawH}" ` +
        `href="data:image/png;base64,${png.data.toString("base64")}"/>`,
      `<text x="${x + cellW / 2}" y="${y + drawH + 17}" text-anchor="middle" ` +
        `font-size="${style.titleSize}" fill="${style.axisColor}">${escapeText(caption)}</text>`,
    );
    maxBottom = Math.max(maxBottom, y + drawH + captionH);
  });
  const doc = svgDocument(style.width, maxBottom + gap, style.background, body);
  writeFileSync(job.output, doc);
  return job.output;
}

export function renderFigure(job: FigureJob): string {
  switch (job.kind) {
    case "traces":
      return plotTraces(job);
    case "final-spectrum":
      return plotFinalSpectrum(job);
    case "sphere-grid":
      return plotSphereGrid(job);
    default:
      throw new SchemaError(`unknown figure kind ${JSON.stringify(job.kind)}`);
  }
}
