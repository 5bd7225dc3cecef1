/**
 * Figure definitions: how each figure id maps result-CSV columns onto chart
 * series. All transforms are plotting-only (column selection, 1-x flips for
 * the accuracy curves, one-sigma bands).
 */

import {
  columnIndex,
  CsvError,
  numberAt,
  requireColumns,
  Table,
} from "./csv.js";
import { ChartSpec, Series } from "./svg.js";

export const FIGURE_IDS = [
  "fig3a",
  "fig3b",
  "fig5a",
  "fig5b",
  "trace",
] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

interface ResultPoint {
  x: number;
  row: string[];
}

function bySchemes(table: Table): Map<string, ResultPoint[]> {
  const schemeIdx = columnIndex(table, "scheme");
  const xIdx = columnIndex(table, "x_value");
  const groups = new Map<string, ResultPoint[]>();
  for (const row of table.rows) {
    const x = numberAt(row, xIdx);
    if (x === null) {
      throw new CsvError("missing column: x_value");
    }
    const scheme = row[schemeIdx];
    if (!groups.has(scheme)) {
      groups.set(scheme, []);
    }
    groups.get(scheme)!.push({ x, row });
  }
  for (const pts of groups.values()) {
    pts.sort((a, b) => a.x - b.x);
  }
  return groups;
}

function accuracyFigure(table: Table, flavor: "mean" | "variance"): ChartSpec {
  requireColumns(table, [
    "scheme",
    "x_value",
    "aux_mean_factor",
    "aux_analytic",
    "aux_variance",
  ]);
  const meanIdx = columnIndex(table, "aux_mean_factor");
  const anaIdx = columnIndex(table, "aux_analytic");
  const varIdx = columnIndex(table, "aux_variance");
  const series: Series[] = [];
  for (const [scheme, pts] of bySchemes(table)) {
    if (flavor === "mean") {
      series.push({
        label: `${scheme} simulated`,
        points: pts.map((p) => [p.x, 1 - (numberAt(p.row, meanIdx) ?? 0)]),
      });
      series.push({
        label: `${scheme} analytic`,
        dashed: true,
        points: pts.map((p) => [p.x, 1 - (numberAt(p.row, anaIdx) ?? 0)]),
      });
    } else {
      series.push({
        label: scheme,
        points: pts.map((p) => [p.x, numberAt(p.row, varIdx) ?? 0]),
      });
    }
  }
  return {
    title:
      flavor === "mean"
        ? "Estimation accuracy: 1 - mean hold factor"
        : "Estimation accuracy: spread about the analytic factor",
    xLabel: "reference-tone SNR [dB]",
    yLabel: flavor === "mean" ? "1 - mean factor" : "mean squared deviation",
    yScale: "log",
    series,
  };
}

function iseFigure(table: Table, xLabel: string, title: string): ChartSpec {
  requireColumns(table, ["scheme", "x_value", "ise_mean", "ise_std"]);
  const meanIdx = columnIndex(table, "ise_mean");
  const stdIdx = columnIndex(table, "ise_std");
  const series: Series[] = [];
  for (const [scheme, pts] of bySchemes(table)) {
    const points: Array<[number, number]> = [];
    const band: Array<[number, number, number]> = [];
    let hasBand = false;
    for (const p of pts) {
      const mean = numberAt(p.row, meanIdx);
      if (mean === null) {
        throw new CsvError("missing column: ise_mean");
      }
      points.push([p.x, mean]);
      const std = numberAt(p.row, stdIdx) ?? 0;
      if (std > 0) {
        hasBand = true;
      }
      band.push([p.x, mean - std, mean + std]);
    }
    series.push({
      label: scheme,
      points,
      band: hasBand ? band : undefined,
    });
  }
  return {
    title,
    xLabel,
    yLabel: "spectral efficiency [bits/s/Hz]",
    yScale: "linear",
    series,
  };
}

function traceFigure(table: Table): ChartSpec {
  requireColumns(table, ["t_seconds", "theta_rad"]);
  const tIdx = columnIndex(table, "t_seconds");
  const series: Series[] = table.columns
    .filter((name) => name !== "t_seconds")
    .map((name) => {
      const idx = columnIndex(table, name);
      return {
        label: name,
        points: table.rows.map(
          (row) =>
            [
              (numberAt(row, tIdx) ?? 0) * 1e6,
              numberAt(row, idx) ?? 0,
            ] as [number, number],
        ),
      };
    });
  return {
    title: "Recovery-loop phase trajectory",
    xLabel: "time [us]",
    yLabel: "phase [rad]",
    yScale: "linear",
    series,
  };
}

export function figureSpec(figure: FigureId, table: Table): ChartSpec {
  switch (figure) {
    case "fig3a":
      return accuracyFigure(table, "mean");
    case "fig3b":
      return accuracyFigure(table, "variance");
    case "fig5a":
      return iseFigure(
        table,
        "per-antenna channel SNR [dB]",
        "Spectral efficiency vs SNR",
      );
    case "fig5b":
      return iseFigure(
        table,
        "number of multipath clusters",
        "Spectral efficiency vs cluster count",
      );
    case "trace":
      return traceFigure(table);
  }
}
