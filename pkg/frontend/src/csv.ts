/**
 * Loading and validation of the versioned experiment CSVs.
 *
 * Both schemas carry their name in a leading `#` comment line:
 *   cfmimo-convergence v1: scenario,iteration,distance
 *   cfmimo-rates v1:       drop,user,method,scenario,bound,rate
 */

import Papa from "papaparse";

export interface CsvTable {
  columns: string[];
  rows: Record<string, string>[];
}

export const CONVERGENCE_COLUMNS = ["scenario", "iteration", "distance"];
export const RATES_COLUMNS = ["drop", "user", "method", "scenario", "bound", "rate"];

/** Parse a CSV document, requiring exactly the expected header columns. */
export function parseCsv(text: string, expectedColumns: string[]): CsvTable {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    comments: "#",
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`malformed CSV (row ${e.row}): ${e.message}`);
  }
  const columns = parsed.meta.fields ?? [];
  for (const col of expectedColumns) {
    if (!columns.includes(col)) {
      throw new Error(`schema mismatch: missing column '${col}'`);
    }
  }
  for (const col of columns) {
    if (!expectedColumns.includes(col)) {
      throw new Error(`schema mismatch: unexpected column '${col}'`);
    }
  }
  return { columns, rows: parsed.data };
}

export function numeric(row: Record<string, string>, column: string): number {
  const value = Number(row[column]);
  if (Number.isNaN(value)) {
    throw new Error(`schema mismatch: non-numeric value in column '${column}'`);
  }
  return value;
}
