/**
 * Fixed styling for all figures, checked in so outputs are comparable
 * across runs.  Jobs may override individual fields.
 */

export interface Style {
  width: number;
  panelHeight: number;
  margin: { top: number; right: number; bottom: number; left: number };
  background: string;
  axisColor: string;
  gridColor: string;
  fontFamily: string;
  fontSize: number;
  titleSize: number;
  /** cycled per series */
  palette: string[];
  oracleColor: string;
  scatterColor: string;
  strokeWidth: number;
}

export const DEFAULT_STYLE: Style = {
  width: 860,
  panelHeight: 300,
  margin: { top: 34, right: 18, bottom: 40, left: 64 },
  background: "#ffffff",
  axisColor: "#222222",
  gridColor: "#dddddd",
  fontFamily: "Helvetica, Arial, sans-serif",
  fontSize: 12,
  titleSize: 14,
  palette: ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"],
  oracleColor: "#222222",
  scatterColor: "#d62728",
  strokeWidth: 1.4,
};

export function mergeStyle(overrides?: Partial<Style>): Style {
  return { ...DEFAULT_STYLE, ...(overrides ?? {}) };
}
