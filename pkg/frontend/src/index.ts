export { FigureJob, FigureKind, plotFinalSpectrum, plotSphereGrid, plotTraces, renderFigure } from "./figures.js";
export { FinalSpectrumData, readFinalSpectrumCsv, readPng, readTrajectoryCsv, SchemaError, TrajectoryData, TRAJECTORY_COLUMNS } from "./schema.js";
export { DEFAULT_STYLE, mergeStyle, Style } from "./style.js";
