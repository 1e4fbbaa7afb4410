/**
 * Sweep CSV reading and writing.
 *
 * The format is the simulation engine's: a `# name [unit], ...` annotation
 * line, a bare header line, then numeric rows. Blank lines are ignored.
 * Written floats use the engine's repr so files survive cross-tool round
 * trips byte-identically.
 */

import * as fs from "node:fs";

import { floatRepr } from "./pyfmt";

export class DataError extends Error {}

export interface ColumnTag {
  name: string;
  unit: string;
}

export interface SweepData {
  tags: ColumnTag[];
  rows: number[][];
}

export function parseSweepCsv(text: string, where: string): SweepData {
  const lines = text
    .split(/\r?\n/)
    .filter((ln) => ln.trim().length > 0);
  if (lines.length < 3 || !lines[0].startsWith("#")) {
    throw new DataError(
      `${where}: expected a '# name [unit], ...' comment line, a header ` +
        `line, and at least one data row`,
    );
  }
  const tags: ColumnTag[] = [];
  for (const part of lines[0].slice(1).split(",")) {
    const piece = part.trim();
    const open = piece.indexOf("[");
    if (open < 0 || !piece.endsWith("]")) {
      throw new DataError(`${where}: malformed column annotation ${JSON.stringify(piece)}`);
    }
    tags.push({
      name: piece.slice(0, open).trim(),
      unit: piece.slice(open + 1, -1).trim(),
    });
  }
  const header = lines[1].split(",").map((h) => h.trim());
  if (header.length !== tags.length || header.some((h, i) => h !== tags[i].name)) {
    throw new DataError(
      `${where}: header line does not match the column annotations`,
    );
  }
  const rows: number[][] = [];
  for (let k = 2; k < lines.length; k++) {
    const parts = lines[k].split(",");
    if (parts.length !== tags.length) {
      throw new DataError(
        `${where} line ${k + 1}: expected ${tags.length} fields, got ${parts.length}`,
      );
    }
    const row = parts.map((p) => Number(p.trim()));
    const bad = row.findIndex((v) => !Number.isFinite(v));
    if (bad >= 0) {
      throw new DataError(
        `${where} line ${k + 1}: cannot parse ${JSON.stringify(parts[bad].trim())} as a number`,
      );
    }
    rows.push(row);
  }
  return { tags, rows };
}

export function readSweepCsv(path: string): SweepData {
  let text: string;
  try {
    text = fs.readFileSync(path, "utf8");
  } catch (err) {
    throw new DataError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return parseSweepCsv(text, path);
}

export function formatSweepCsv(tags: ColumnTag[], rows: number[][]): string {
  const lines = ["# " + tags.map((t) => `${t.name} [${t.unit}]`).join(", ")];
  lines.push(tags.map((t) => t.name).join(","));
  for (const row of rows) {
    lines.push(row.map(floatRepr).join(","));
  }
  return lines.join("\n") + "\n";
}

export function writeSweepCsv(path: string, tags: ColumnTag[], rows: number[][]): void {
  fs.writeFileSync(path, formatSweepCsv(tags, rows));
}

/** Column index by name, with a diagnostic listing what the file has. */
export function columnIndex(data: SweepData, name: string, where: string): number {
  const idx = data.tags.findIndex((t) => t.name === name);
  if (idx < 0) {
    const have = data.tags.map((t) => t.name).join(", ");
    throw new DataError(`${where}: missing column ${name}; file has ${have}`);
  }
  return idx;
}
