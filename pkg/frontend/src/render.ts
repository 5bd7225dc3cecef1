/** Batch rendering: result CSVs in, one SVG out. Inputs are never written. */

import { writeFileSync } from "node:fs";

import { concatTables, readCsv } from "./csv.js";
import { FigureId, figureSpec } from "./figures.js";
import { buildSvg } from "./svg.js";

export interface RenderRequest {
  figure: FigureId;
  inputs: string[];
  output: string;
}

export function renderToString(figure: FigureId, inputs: string[]): string {
  const table = concatTables(inputs.map(readCsv));
  return buildSvg(figureSpec(figure, table));
}

export function render(req: RenderRequest): void {
  writeFileSync(req.output, renderToString(req.figure, req.inputs), "utf8");
}
