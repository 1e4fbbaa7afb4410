/**
 * Validation metrics, defined identically to the simulation engine's
 * validate operation so the two tools score a model file the same way:
 * per output, rmse = sqrt(sse/n), max_abs_err, and r2 = 1 - sse/sst
 * (null when the targets have zero variance).
 */

import { forward } from "./net";
import { Model } from "./modelfile";
import { gFormat } from "./pyfmt";

export class MetricsError extends Error {}

export interface OutputMetrics {
  name: string;
  rmse: number;
  maxAbsErr: number;
  r2: number | null;
}

export function evalModel(model: Model, inputs: number[]): number[] {
  if (model.kind === "net") {
    return forward(model.net!, inputs);
  }
  return [evalTable(model, inputs)];
}

/** Multilinear table lookup with flat clamping outside the grid. */
function evalTable(model: Model, point: number[]): number {
  const { axes, values } = model.table!;
  if (point.length !== axes.length) {
    throw new MetricsError(`expected ${axes.length} inputs, got ${point.length}`);
  }
  const los: number[] = [];
  const fracs: number[] = [];
  for (const [d, axis] of axes.entries()) {
    const coords = axis.coords;
    const x = point[d];
    if (coords.length === 1 || x <= coords[0]) {
      los.push(0);
      fracs.push(0);
      continue;
    }
    if (x >= coords[coords.length - 1]) {
      los.push(coords.length - 2);
      fracs.push(1);
      continue;
    }
    let lo = 0;
    let hi = coords.length - 1;
    while (hi - lo > 1) {
      const mid = (lo + hi) >> 1;
      if (coords[mid] <= x) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    los.push(lo);
    fracs.push((x - coords[lo]) / (coords[lo + 1] - coords[lo]));
  }
  const strides: number[] = new Array(axes.length).fill(1);
  for (let d = axes.length - 2; d >= 0; d--) {
    strides[d] = strides[d + 1] * axes[d + 1].coords.length;
  }
  let total = 0;
  for (let corner = 0; corner < 1 << axes.length; corner++) {
    let weight = 1;
    let index = 0;
    for (let d = 0; d < axes.length; d++) {
      const upper = (corner >> d) & 1;
      const f = fracs[d];
      weight *= upper ? f : 1 - f;
      const i = Math.min(los[d] + upper, axes[d].coords.length - 1);
      index += i * strides[d];
    }
    if (weight !== 0) {
      total += weight * values[index];
    }
  }
  return total;
}

/** Score (inputs, targets) pairs; pairs are rows of raw-unit numbers. */
export function validateModelOn(
  model: Model,
  pairs: { inputs: number[]; outputs: number[] }[],
): OutputMetrics[] {
  if (pairs.length === 0) {
    throw new MetricsError("holdout set is empty");
  }
  const nOut = model.outputs.length;
  const preds: number[][] = [];
  for (const pair of pairs) {
    if (pair.outputs.length !== nOut) {
      throw new MetricsError(
        `holdout row has ${pair.outputs.length} outputs, model has ${nOut}`,
      );
    }
    preds.push(evalModel(model, pair.inputs));
  }
  const n = pairs.length;
  const out: OutputMetrics[] = [];
  for (let j = 0; j < nOut; j++) {
    let sse = 0;
    let maxAbs = 0;
    for (let s = 0; s < n; s++) {
      const e = preds[s][j] - pairs[s].outputs[j];
      sse += e * e;
      const abs = Math.abs(e);
      if (abs > maxAbs) {
        maxAbs = abs;
      }
    }
    let mean = 0;
    for (const pair of pairs) {
      mean += pair.outputs[j];
    }
    mean /= n;
    let sst = 0;
    for (const pair of pairs) {
      sst += (pair.outputs[j] - mean) ** 2;
    }
    out.push({
      name: model.outputs[j].name,
      rmse: Math.sqrt(sse / n),
      maxAbsErr: maxAbs,
      r2: sst > 0 ? 1 - sse / sst : null,
    });
  }
  return out;
}

/** One report line per output, formatted like the engine's validate. */
export function metricsLine(m: OutputMetrics): string {
  const r2 = m.r2 === null ? "n/a" : gFormat(m.r2);
  return `${m.name}: rmse=${gFormat(m.rmse)} max_abs_err=${gFormat(m.maxAbsErr)} r2=${r2}`;
}

/** Validation block in the shape the model file's metadata carries. */
export function metricsMetadata(metrics: OutputMetrics[]): {
  rmse: number[];
  max_abs_err: number[];
  r2: (number | null)[];
} {
  return {
    rmse: metrics.map((m) => m.rmse),
    max_abs_err: metrics.map((m) => m.maxAbsErr),
    r2: metrics.map((m) => m.r2),
  };
}
