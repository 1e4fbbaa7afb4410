import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import {
  DataError,
  columnIndex,
  formatSweepCsv,
  parseSweepCsv,
  readSweepCsv,
  writeSweepCsv,
} from "../src/data";

const SAMPLE = [
  "# speed [rad/s], torque [N*m], loss_w [W]",
  "speed,torque,loss_w",
  "0.0,0.0,0.0",
  "",
  "100.0,50.0,1250.5",
  "200.0,-25.0,612.25",
  "",
].join("\n");

let dir: string;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-data-"));
});

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe("parseSweepCsv", () => {
  it("reads tags and rows, skipping blank lines", () => {
    const data = parseSweepCsv(SAMPLE, "sample.csv");
    expect(data.tags).toEqual([
      { name: "speed", unit: "rad/s" },
      { name: "torque", unit: "N*m" },
      { name: "loss_w", unit: "W" },
    ]);
    expect(data.rows).toEqual([
      [0, 0, 0],
      [100, 50, 1250.5],
      [200, -25, 612.25],
    ]);
  });

  it("rejects files without the annotation line", () => {
    expect(() => parseSweepCsv("speed\n1.0\n2.0\n", "x.csv")).toThrow(
      /expected a '# name \[unit\], \.\.\.' comment line/,
    );
  });

  it("rejects malformed column annotations", () => {
    const text = "# speed rad/s\nspeed\n1.0\n";
    expect(() => parseSweepCsv(text, "x.csv")).toThrow(/malformed column annotation/);
  });

  it("rejects a header that disagrees with the annotations", () => {
    const text = "# speed [rad/s]\nvelocity\n1.0\n";
    expect(() => parseSweepCsv(text, "x.csv")).toThrow(/header line does not match/);
  });

  it("rejects short rows with the line number", () => {
    const text = "# a [1], b [1]\na,b\n1.0,2.0\n3.0\n";
    expect(() => parseSweepCsv(text, "x.csv")).toThrow(
      /x.csv line 4: expected 2 fields, got 1/,
    );
  });

  it("rejects non-numeric fields with the offending token", () => {
    const text = "# a [1], b [1]\na,b\n1.0,fast\n";
    expect(() => parseSweepCsv(text, "x.csv")).toThrow(/cannot parse "fast" as a number/);
  });

  it("requires at least one data row", () => {
    expect(() => parseSweepCsv("# a [1]\na\n", "x.csv")).toThrow(DataError);
  });
});

describe("round trips", () => {
  it("format -> parse is lossless", () => {
    const data = parseSweepCsv(SAMPLE, "sample.csv");
    const text = formatSweepCsv(data.tags, data.rows);
    const again = parseSweepCsv(text, "again.csv");
    expect(again).toEqual(data);
  });

  it("write -> read through the filesystem is byte-stable", () => {
    const file = path.join(dir, "roundtrip.csv");
    const tags = [
      { name: "x", unit: "1" },
      { name: "y", unit: "V" },
    ];
    const rows = [
      [0.1, -3.25e-7],
      [2, 398.7503],
    ];
    writeSweepCsv(file, tags, rows);
    const first = fs.readFileSync(file, "utf8");
    const data = readSweepCsv(file);
    writeSweepCsv(file, data.tags, data.rows);
    expect(fs.readFileSync(file, "utf8")).toBe(first);
    expect(first).toContain("0.1,-3.25e-07");
  });

  it("reports unreadable files", () => {
    expect(() => readSweepCsv(path.join(dir, "missing.csv"))).toThrow(/cannot read/);
  });
});

describe("columnIndex", () => {
  it("finds columns and lists what exists when one is missing", () => {
    const data = parseSweepCsv(SAMPLE, "sample.csv");
    expect(columnIndex(data, "torque", "sample.csv")).toBe(1);
    expect(() => columnIndex(data, "current", "sample.csv")).toThrow(
      /missing column current; file has speed, torque, loss_w/,
    );
  });
});
