/**
 * Model-exchange files (schema_version 1).
 *
 * The file format is the contract between this trainer and the simulation
 * engine; nothing else crosses the boundary. Serialization is canonical and
 * byte-compatible with the engine's writer: fixed key order, compact
 * separators, shortest round-trip floats, metadata keys sorted recursively
 * and metadata numbers coerced to float, trailing newline.
 */

import * as fs from "node:fs";

import { DenseNet, validateNet } from "./net";
import { floatRepr, jsonString } from "./pyfmt";

export const SCHEMA_VERSION = 1;

export class ModelFormatError extends Error {}

export interface PortTag {
  name: string;
  unit: string;
}

export interface AxisSpec {
  name: string;
  unit: string;
  coords: number[];
}

export interface TableSpec {
  axes: AxisSpec[];
  values: number[];
}

export type MetaValue =
  | number
  | string
  | boolean
  | null
  | MetaValue[]
  | { [key: string]: MetaValue };

export interface Model {
  kind: "table" | "net";
  inputs: PortTag[];
  outputs: PortTag[];
  table?: TableSpec;
  net?: DenseNet;
  metadata: Record<string, MetaValue>;
}

// --- canonical serialization ----------------------------------------------

function metaJson(value: MetaValue, where: string): string {
  if (typeof value === "boolean") {
    return value ? "true" : "false";
  }
  if (value === null) {
    return "null";
  }
  if (typeof value === "number") {
    if (!Number.isFinite(value)) {
      throw new ModelFormatError(`${where}: non-finite number`);
    }
    return floatRepr(value);
  }
  if (typeof value === "string") {
    return jsonString(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map((v) => metaJson(v, where)).join(",") + "]";
  }
  if (typeof value === "object") {
    const keys = Object.keys(value).sort((a, b) => (a < b ? -1 : a > b ? 1 : 0));
    const parts = keys.map(
      (k) => `${jsonString(k)}:${metaJson(value[k], `${where}.${k}`)}`,
    );
    return "{" + parts.join(",") + "}";
  }
  throw new ModelFormatError(`${where}: unsupported value type ${typeof value}`);
}

function portsJson(ports: PortTag[]): string {
  const parts = ports.map(
    (p) => `{"name":${jsonString(p.name)},"unit":${jsonString(p.unit)}}`,
  );
  return "[" + parts.join(",") + "]";
}

function floatsJson(values: number[]): string {
  return "[" + values.map(floatRepr).join(",") + "]";
}

export function dumpsModel(model: Model): string {
  validateModel(model);
  let payload: string;
  if (model.kind === "table") {
    const axes = model.table!.axes.map(
      (a) =>
        `{"name":${jsonString(a.name)},"unit":${jsonString(a.unit)},` +
        `"coords":${floatsJson(a.coords)}}`,
    );
    payload = `"table":{"axes":[${axes.join(",")}],"values":${floatsJson(
      model.table!.values,
    )}}`;
  } else {
    const net = model.net!;
    const norm = (pairs: { mean: number; scale: number }[]) =>
      "[" +
      pairs
        .map((p) => `{"mean":${floatRepr(p.mean)},"scale":${floatRepr(p.scale)}}`)
        .join(",") +
      "]";
    const layers = net.layers.map(
      (l) =>
        `{"weights":[${l.weights.map(floatsJson).join(",")}],` +
        `"bias":${floatsJson(l.bias)},` +
        `"activation":${jsonString(l.activation)}}`,
    );
    payload =
      `"net":{"norm_in":${norm(net.normIn)},"norm_out":${norm(net.normOut)},` +
      `"layers":[${layers.join(",")}]}`;
  }
  return (
    `{"schema_version":${SCHEMA_VERSION},` +
    `"kind":${jsonString(model.kind)},` +
    `"inputs":${portsJson(model.inputs)},` +
    `"outputs":${portsJson(model.outputs)},` +
    payload +
    `,"metadata":${metaJson(model.metadata, "metadata")}}\n`
  );
}

export function saveModel(model: Model, path: string): void {
  fs.writeFileSync(path, dumpsModel(model));
}

// --- structural validation ------------------------------------------------

export function validateModel(model: Model): void {
  if (model.kind !== "table" && model.kind !== "net") {
    throw new ModelFormatError(`unknown kind ${JSON.stringify(model.kind)}`);
  }
  const names = [...model.inputs, ...model.outputs].map((p) => p.name);
  if (new Set(names).size !== names.length) {
    throw new ModelFormatError("port names must be unique across inputs and outputs");
  }
  if (model.inputs.length === 0 || model.outputs.length === 0) {
    throw new ModelFormatError("models need at least one input and one output");
  }
  if (model.kind === "table") {
    const table = model.table;
    if (!table) {
      throw new ModelFormatError("kind is table but table block missing");
    }
    if (model.outputs.length !== 1) {
      throw new ModelFormatError("table models have exactly one output");
    }
    if (table.axes.length !== model.inputs.length) {
      throw new ModelFormatError(
        `table has ${table.axes.length} axes but model declares ` +
          `${model.inputs.length} inputs`,
      );
    }
    let expected = 1;
    for (const axis of table.axes) {
      if (axis.coords.length < 1) {
        throw new ModelFormatError(`axis ${axis.name}: needs at least one node`);
      }
      for (let k = 1; k < axis.coords.length; k++) {
        if (!(axis.coords[k] > axis.coords[k - 1])) {
          throw new ModelFormatError(`axis ${axis.name}: coords not strictly increasing`);
        }
      }
      expected *= axis.coords.length;
    }
    if (table.values.length !== expected) {
      throw new ModelFormatError(
        `value count ${table.values.length} != product of axis lengths ${expected}`,
      );
    }
    for (const v of [...table.values, ...table.axes.flatMap((a) => a.coords)]) {
      if (!Number.isFinite(v)) {
        throw new ModelFormatError("table contains non-finite values");
      }
    }
  } else {
    const net = model.net;
    if (!net) {
      throw new ModelFormatError("kind is net but net block missing");
    }
    try {
      validateNet(net);
    } catch (err) {
      throw new ModelFormatError((err as Error).message);
    }
    if (net.normIn.length !== model.inputs.length || net.normOut.length !== model.outputs.length) {
      throw new ModelFormatError(
        `net is ${net.normIn.length}->${net.normOut.length} but model declares ` +
          `${model.inputs.length}->${model.outputs.length} ports`,
      );
    }
    for (const layer of net.layers) {
      for (const v of [...layer.bias, ...layer.weights.flat()]) {
        if (!Number.isFinite(v)) {
          throw new ModelFormatError("net contains non-finite values");
        }
      }
    }
  }
}

// --- reading --------------------------------------------------------------

function requireThat(cond: boolean, where: string, msg: string): asserts cond {
  if (!cond) {
    throw new ModelFormatError(`${where}: ${msg}`);
  }
}

function asRecord(value: unknown, where: string): Record<string, unknown> {
  requireThat(
    typeof value === "object" && value !== null && !Array.isArray(value),
    where,
    "expected an object",
  );
  return value as Record<string, unknown>;
}

function asFloats(value: unknown, where: string): number[] {
  requireThat(Array.isArray(value), where, "expected a list of numbers");
  return (value as unknown[]).map((v, k) => {
    requireThat(typeof v === "number", `${where}[${k}]`, "expected a number");
    return v as number;
  });
}

function asPorts(value: unknown, where: string): PortTag[] {
  requireThat(Array.isArray(value) && value.length > 0, where, "expected a non-empty list");
  return (value as unknown[]).map((entry, k) => {
    const e = asRecord(entry, `${where}[${k}]`);
    requireThat(typeof e.name === "string", `${where}[${k}]`, "missing name");
    requireThat(typeof e.unit === "string", `${where}[${k}]`, "missing unit");
    return { name: e.name as string, unit: e.unit as string };
  });
}

export function loadsModel(text: string, where = "model"): Model {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new ModelFormatError(`${where}: not valid JSON (${(err as Error).message})`);
  }
  const top = asRecord(doc, where);
  requireThat(
    top.schema_version === SCHEMA_VERSION,
    where,
    `unsupported schema_version ${JSON.stringify(top.schema_version)} ` +
      `(this tool reads ${SCHEMA_VERSION})`,
  );
  const kind = top.kind;
  requireThat(kind === "table" || kind === "net", where, `unknown kind ${JSON.stringify(kind)}`);
  const inputs = asPorts(top.inputs, `${where}.inputs`);
  const outputs = asPorts(top.outputs, `${where}.outputs`);
  requireThat(
    typeof top.metadata === "object" && top.metadata !== null && !Array.isArray(top.metadata),
    where,
    "missing metadata object",
  );

  const model: Model = {
    kind,
    inputs,
    outputs,
    metadata: top.metadata as Record<string, MetaValue>,
  };
  if (kind === "table") {
    const spec = asRecord(top.table, `${where}.table`);
    requireThat(Array.isArray(spec.axes) && spec.axes.length > 0,
      `${where}.table.axes`, "expected a non-empty list");
    const axes = (spec.axes as unknown[]).map((entry, k) => {
      const loc = `${where}.table.axes[${k}]`;
      const a = asRecord(entry, loc);
      requireThat(typeof a.name === "string", loc, "missing name");
      requireThat(typeof a.unit === "string", loc, "missing unit");
      return {
        name: a.name as string,
        unit: a.unit as string,
        coords: asFloats(a.coords ?? [], `${loc}.coords`),
      };
    });
    model.table = { axes, values: asFloats(spec.values ?? [], `${where}.table.values`) };
  } else {
    const spec = asRecord(top.net, `${where}.net`);
    const normPairs = (key: string) => {
      const raw = spec[key];
      requireThat(Array.isArray(raw) && raw.length > 0,
        `${where}.net.${key}`, "expected a non-empty list");
      return (raw as unknown[]).map((entry, k) => {
        const loc = `${where}.net.${key}[${k}]`;
        const e = asRecord(entry, loc);
        requireThat("mean" in e && "scale" in e, loc, "expected an object with mean and scale");
        const [mean, scale] = asFloats([e.mean, e.scale], loc);
        return { mean, scale };
      });
    };
    const normIn = normPairs("norm_in");
    const normOut = normPairs("norm_out");
    requireThat(Array.isArray(spec.layers) && spec.layers.length > 0,
      `${where}.net.layers`, "expected a non-empty list");
    const layers = (spec.layers as unknown[]).map((entry, k) => {
      const loc = `${where}.net.layers[${k}]`;
      const lay = asRecord(entry, loc);
      const act = lay.activation;
      requireThat(act === "tanh" || act === "relu" || act === "identity",
        loc, `unknown activation ${JSON.stringify(act)}`);
      requireThat(Array.isArray(lay.weights) && lay.weights.length > 0,
        `${loc}.weights`, "expected a non-empty list of rows");
      const weights = (lay.weights as unknown[]).map((row, r) =>
        asFloats(row, `${loc}.weights[${r}]`),
      );
      return {
        weights,
        bias: asFloats(lay.bias ?? [], `${loc}.bias`),
        activation: act as "tanh" | "relu" | "identity",
      };
    });
    model.net = { layers, normIn, normOut };
  }
  try {
    validateModel(model);
  } catch (err) {
    throw new ModelFormatError(`${where}: ${(err as Error).message}`);
  }
  return model;
}

export function loadModel(path: string): Model {
  let text: string;
  try {
    text = fs.readFileSync(path, "utf8");
  } catch (err) {
    throw new ModelFormatError(`cannot read model file ${path}: ${(err as Error).message}`);
  }
  return loadsModel(text, path);
}
