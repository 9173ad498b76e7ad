/** Minimal SVG assembly: panels with linear axes, polylines and dots. */

import { Style } from "./style.js";

export interface Extent {
  min: number;
  max: number;
}

export function extentOf(values: number[], pad = 0.05): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (!Number.isFinite(min)) {
    min = 0;
    max = 1;
  }
  if (min === max) {
    // degenerate (single point or constant series): open up a unit window
    min -= 0.5;
    max += 0.5;
  }
  const span = max - min;
  return { min: min - pad * span, max: max + pad * span };
}

export function ticks(ext: Extent, count = 5): number[] {
  const span = ext.max - ext.min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const first = Math.ceil(ext.min / s) * s;
  const out: number[] = [];
  for (let v = first; v <= ext.max + 1e-12 * span; v += s) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(6)));
}

export class Panel {
  readonly parts: string[] = [];

  constructor(
    readonly style: Style,
    readonly x0: number,
    readonly y0: number,
    readonly w: number,
    readonly h: number,
    readonly xext: Extent,
    readonly yext: Extent,
  ) {}

  sx(x: number): number {
    return this.x0 + ((x - this.xext.min) / (this.xext.max - this.xext.min)) * this.w;
  }

  sy(y: number): number {
    return this.y0 + this.h - ((y - this.yext.min) / (this.yext.max - this.yext.min)) * this.h;
  }

  frame(title: string, xlabel: string, ylabel: string): void {
    const st = this.style;
    for (const t of ticks(this.xext)) {
      const x = this.sx(t);
      this.parts.push(
        `<line x1="${x.toFixed(2)}" y1="${this.y0}" x2="${x.toFixed(2)}" y2="${this.y0 + this.h}" stroke="${st.gridColor}" stroke-width="0.6"/>`,
        `<text x="${x.toFixed(2)}" y="${this.y0 + this.h + 16}" text-anchor="middle" font-size="${st.fontSize}" fill="${st.axisColor}">${fmtTick(t)}</text>`,
      );
    }
    for (const t of ticks(this.yext)) {
      const y = this.sy(t);
      this.parts.push(
        `<line x1="${this.x0}" y1="${y.toFixed(2)}" x2="${this.x0 + this.w}" y2="${y.toFixed(2)}" stroke="${st.gridColor}" stroke-width="0.6"/>`,
        `<text x="${this.x0 - 6}" y="${(y + 4).toFixed(2)}" text-anchor="end" font-size="${st.fontSize}" fill="${st.axisColor}">${fmtTick(t)}</text>`,
      );
    }
    this.parts.push(
      `<rect x="${this.x0}" y="${this.y0}" width="${this.w}" height="${this.h}" fill="none" stroke="${st.axisColor}" stroke-width="1"/>`,
      `<text x="${this.x0 + this.w / 2}" y="${this.y0 - 10}" text-anchor="middle" font-size="${st.titleSize}" font-weight="bold" fill="${st.axisColor}">${escapeText(title)}</text>`,
      `<text x="${this.x0 + this.w / 2}" y="${this.y0 + this.h + 32}" text-anchor="middle" font-size="${st.fontSize}" fill="${st.axisColor}">${escapeText(xlabel)}</text>`,
      `<text transform="translate(${this.x0 - 48},${this.y0 + this.h / 2}) rotate(-90)" text-anchor="middle" font-size="${st.fontSize}" fill="${st.axisColor}">${escapeText(ylabel)}</text>`,
    );
  }

  line(xs: number[], ys: number[], color: string, width?: number): void {
    if (xs.length === 1) {
      // single sample: render a visible dot instead of a zero-length path
      this.dot(xs[0], ys[0], color, 3);
      return;
    }
    const pts = xs
      .map((x, i) => `${this.sx(x).toFixed(2)},${this.sy(ys[i]).toFixed(2)}`)
      .join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="${width ?? this.style.strokeWidth}"/>`,
    );
  }

  dot(x: number, y: number, color: string, r = 2): void {
    this.parts.push(
      `<circle cx="${this.sx(x).toFixed(2)}" cy="${this.sy(y).toFixed(2)}" r="${r}" fill="${color}"/>`,
    );
  }

  legend(entries: Array<{ label: string; color: string }>): void {
    const st = this.style;
    let y = this.y0 + 14;
    for (const e of entries) {
      const x = this.x0 + this.w - 120;
      this.parts.push(
        `<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${e.color}" stroke-width="2"/>`,
        `<text x="${x + 28}" y="${y}" font-size="${st.fontSize}" fill="${st.axisColor}">${escapeText(e.label)}</text>`,
      );
      y += 16;
    }
  }
}

export function escapeText(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function svgDocument(width: number, height: number, background: string, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect x="0" y="0" width="${width}" height="${height}" fill="${background}"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
