/**
 * Minimal reader for the simulator's result/trace CSVs.
 *
 * The files are plain comma-separated with a single header row and no
 * quoting, so a straight split is exact.
 */

import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: string[][];
}

export class CsvError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new CsvError("no rows");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((ln) => ln.split(","));
  if (rows.length === 0) {
    throw new CsvError("no rows");
  }
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new CsvError(
        `row has ${row.length} fields, header has ${columns.length}`,
      );
    }
  }
  return { columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Concatenate tables sharing one header (multi-file figure inputs). */
export function concatTables(tables: Table[]): Table {
  const [first, ...rest] = tables;
  for (const t of rest) {
    if (t.columns.join(",") !== first.columns.join(",")) {
      throw new CsvError("input files have different headers");
    }
  }
  return {
    columns: first.columns,
    rows: tables.flatMap((t) => t.rows),
  };
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new CsvError(`missing column: ${name}`);
    }
  }
}

export function columnIndex(table: Table, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`missing column: ${name}`);
  }
  return idx;
}

export function numberAt(row: string[], idx: number): number | null {
  const raw = row[idx];
  if (raw === undefined || raw === "") {
    return null;
  }
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new CsvError(`non-numeric value: ${raw}`);
  }
  return value;
}
