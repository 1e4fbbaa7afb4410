/**
 * Net training from sweep CSVs.
 *
 * A TrainSpec (TOML) names the data file, the input/output columns with
 * their units, the architecture, and the optimization budget. Training is
 * full-batch gradient descent with momentum on standardized columns
 * (mini-batching available through the batch_size field), with best-so-far
 * checkpointing on holdout loss and optional patience-based early stopping.
 * Everything random (split, init, batch order) derives from the seed.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { parse as parseToml } from "smol-toml";

import { ColumnTag, DataError, SweepData, columnIndex, readSweepCsv } from "./data";
import { Activation, DenseNet, Norm, cloneNet, loss, lossAndGradients } from "./net";
import { Model } from "./modelfile";
import { OutputMetrics, metricsMetadata, validateModelOn } from "./metrics";
import { Rng, mulberry32, shuffle, uniform } from "./rng";

export class SpecError extends Error {}

/** Raised when optimization itself fails (non-finite loss). */
export class TrainError extends Error {}

export const DEFAULT_LEARNING_RATE = 0.2;
export const DEFAULT_HOLDOUT_FRACTION = 0.2;
export const MOMENTUM = 0.95;

export interface TrainSpec {
  data: string;
  inputs: ColumnTag[];
  outputs: ColumnTag[];
  hidden: number[];
  activation: Activation;
  epochs: number;
  learningRate: number;
  seed: number;
  holdoutFraction: number;
  patience: number; // 0 disables early stopping
  batchSize: number; // 0 means full batch
}

const TOP_KEYS = new Set([
  "data", "input", "output", "hidden", "activation", "epochs",
  "learning_rate", "seed", "holdout_fraction", "patience", "batch_size",
]);

function specInt(raw: unknown, where: string, min: number): number {
  if (typeof raw !== "number" || !Number.isInteger(raw) || raw < min) {
    throw new SpecError(`${where}: expected an integer >= ${min}`);
  }
  return raw;
}

function specTags(raw: unknown, where: string): ColumnTag[] {
  if (!Array.isArray(raw) || raw.length === 0) {
    throw new SpecError(`${where}: expected at least one [[${where}]] block`);
  }
  return raw.map((entry, k) => {
    if (typeof entry !== "object" || entry === null || Array.isArray(entry)) {
      throw new SpecError(`${where}[${k}]: expected a table`);
    }
    const rec = entry as Record<string, unknown>;
    for (const key of Object.keys(rec)) {
      if (key !== "name" && key !== "unit") {
        throw new SpecError(`${where}[${k}]: unknown key ${key}`);
      }
    }
    if (typeof rec.name !== "string" || typeof rec.unit !== "string") {
      throw new SpecError(`${where}[${k}]: needs name and unit strings`);
    }
    return { name: rec.name, unit: rec.unit };
  });
}

export function parseTrainSpec(text: string, where: string, baseDir: string): TrainSpec {
  let doc: Record<string, unknown>;
  try {
    doc = parseToml(text) as Record<string, unknown>;
  } catch (err) {
    throw new SpecError(`${where}: ${(err as Error).message}`);
  }
  for (const key of Object.keys(doc)) {
    if (!TOP_KEYS.has(key)) {
      throw new SpecError(`${where}: unknown key ${key}`);
    }
  }
  if (typeof doc.data !== "string") {
    throw new SpecError(`${where}: data must name the sweep CSV`);
  }
  const inputs = specTags(doc.input, "input");
  const outputs = specTags(doc.output, "output");
  const names = [...inputs, ...outputs].map((t) => t.name);
  if (new Set(names).size !== names.length) {
    throw new SpecError(`${where}: column names must be unique`);
  }
  if (!Array.isArray(doc.hidden) || doc.hidden.length === 0) {
    throw new SpecError(`${where}: hidden must list at least one layer size`);
  }
  const hidden = doc.hidden.map((v, k) => specInt(v, `${where}: hidden[${k}]`, 1));
  const activation = doc.activation ?? "tanh";
  if (activation !== "tanh" && activation !== "relu") {
    throw new SpecError(
      `${where}: activation must be tanh or relu, got ${JSON.stringify(activation)}`,
    );
  }
  const lr = doc.learning_rate ?? DEFAULT_LEARNING_RATE;
  if (typeof lr !== "number" || !(lr > 0)) {
    throw new SpecError(`${where}: learning_rate must be positive`);
  }
  const frac = doc.holdout_fraction ?? DEFAULT_HOLDOUT_FRACTION;
  if (typeof frac !== "number" || !(frac > 0 && frac <= 0.5)) {
    throw new SpecError(`${where}: holdout_fraction must be in (0, 0.5]`);
  }
  return {
    data: path.resolve(baseDir, doc.data),
    inputs,
    outputs,
    hidden,
    activation,
    epochs: specInt(doc.epochs, `${where}: epochs`, 0),
    learningRate: lr,
    seed: specInt(doc.seed, `${where}: seed`, 0),
    holdoutFraction: frac,
    patience: specInt(doc.patience ?? 0, `${where}: patience`, 0),
    batchSize: specInt(doc.batch_size ?? 0, `${where}: batch_size`, 0),
  };
}

export function loadTrainSpec(specPath: string): TrainSpec {
  let text: string;
  try {
    text = fs.readFileSync(specPath, "utf8");
  } catch (err) {
    throw new SpecError(`cannot read spec file ${specPath}: ${(err as Error).message}`);
  }
  return parseTrainSpec(text, specPath, path.dirname(specPath));
}

// --- data preparation -----------------------------------------------------

function selectColumns(data: SweepData, tags: ColumnTag[], where: string): number[] {
  return tags.map((tag) => {
    const idx = columnIndex(data, tag.name, where);
    const unit = data.tags[idx].unit;
    if (unit !== tag.unit) {
      throw new DataError(
        `column ${tag.name} is [${unit}] in ${where} but the spec says [${tag.unit}]`,
      );
    }
    return idx;
  });
}

function columnNorms(rows: number[][], cols: number[]): Norm[] {
  return cols.map((c) => {
    let mean = 0;
    for (const row of rows) {
      mean += row[c];
    }
    mean /= rows.length;
    let variance = 0;
    for (const row of rows) {
      variance += (row[c] - mean) ** 2;
    }
    const std = Math.sqrt(variance / rows.length);
    // constant columns standardize to zero with unit scale
    return { mean, scale: std > 0 ? std : 1 };
  });
}

function standardize(rows: number[][], cols: number[], norms: Norm[]): number[][] {
  return rows.map((row) =>
    cols.map((c, k) => (row[c] - norms[k].mean) / norms[k].scale),
  );
}

function initNet(
  rng: Rng,
  nIn: number,
  hidden: number[],
  nOut: number,
  activation: Activation,
  normIn: Norm[],
  normOut: Norm[],
): DenseNet {
  const sizes = [nIn, ...hidden, nOut];
  const layers = [];
  for (let l = 0; l + 1 < sizes.length; l++) {
    const fanIn = sizes[l];
    const fanOut = sizes[l + 1];
    const limit = Math.sqrt(6 / (fanIn + fanOut));
    const weights: number[][] = [];
    for (let r = 0; r < fanOut; r++) {
      const row: number[] = [];
      for (let c = 0; c < fanIn; c++) {
        row.push(uniform(rng, -limit, limit));
      }
      weights.push(row);
    }
    layers.push({
      weights,
      bias: new Array(fanOut).fill(0),
      activation: (l + 2 === sizes.length ? "identity" : activation) as Activation,
    });
  }
  return { layers, normIn, normOut };
}

// --- training loop --------------------------------------------------------

export interface TrainHistory {
  trainLoss: number[];
  holdoutLoss: number[];
  /** Monitored (holdout) loss of the checkpoint after each epoch. */
  bestSoFar: number[];
}

export interface TrainResult {
  model: Model;
  metrics: OutputMetrics[];
  bestEpoch: number;
  epochsRun: number;
  history: TrainHistory;
}

export function trainNet(spec: TrainSpec): TrainResult {
  const data = readSweepCsv(spec.data);
  const where = spec.data;
  const inCols = selectColumns(data, spec.inputs, where);
  const outCols = selectColumns(data, spec.outputs, where);
  const n = data.rows.length;
  const nHold = Math.max(1, Math.floor(spec.holdoutFraction * n));
  if (n - nHold < 1) {
    throw new DataError(
      `${where}: ${n} rows leave no training data after a ` +
        `${spec.holdoutFraction} holdout split`,
    );
  }
  const rng = mulberry32(spec.seed);
  const order = shuffle(rng, Array.from({ length: n }, (_, i) => i));
  const holdRows = order.slice(0, nHold).map((i) => data.rows[i]);
  const trainRows = order.slice(nHold).map((i) => data.rows[i]);

  const normIn = columnNorms(trainRows, inCols);
  const normOut = columnNorms(trainRows, outCols);
  const xTrain = standardize(trainRows, inCols, normIn);
  const yTrain = standardize(trainRows, outCols, normOut);
  const xHold = standardize(holdRows, inCols, normIn);
  const yHold = standardize(holdRows, outCols, normOut);

  let net = initNet(
    rng, spec.inputs.length, spec.hidden, spec.outputs.length,
    spec.activation, normIn, normOut,
  );
  const velocity = {
    weights: net.layers.map((l) => l.weights.map((row) => row.map(() => 0))),
    bias: net.layers.map((l) => l.bias.map(() => 0)),
  };

  let best = cloneNet(net);
  let bestLoss = loss(net, xHold, yHold);
  let bestEpoch = 0;
  const history: TrainHistory = { trainLoss: [], holdoutLoss: [], bestSoFar: [] };
  let epochsRun = 0;

  const batchSize = spec.batchSize > 0 ? spec.batchSize : xTrain.length;
  const indices = Array.from({ length: xTrain.length }, (_, i) => i);
  for (let epoch = 1; epoch <= spec.epochs; epoch++) {
    epochsRun = epoch;
    if (spec.batchSize > 0) {
      shuffle(rng, indices);
    }
    let epochLoss = 0;
    let batches = 0;
    for (let start = 0; start < indices.length; start += batchSize) {
      const slice = indices.slice(start, start + batchSize);
      const xs = slice.map((i) => xTrain[i]);
      const ys = slice.map((i) => yTrain[i]);
      const { loss: batchLoss, grads } = lossAndGradients(net, xs, ys);
      if (!Number.isFinite(batchLoss)) {
        throw new TrainError(`loss became non-finite at epoch ${epoch}`);
      }
      epochLoss += batchLoss;
      batches += 1;
      for (let l = 0; l < net.layers.length; l++) {
        const layer = net.layers[l];
        for (let r = 0; r < layer.bias.length; r++) {
          const vRow = velocity.weights[l][r];
          const gRow = grads.weights[l][r];
          const wRow = layer.weights[r];
          for (let c = 0; c < wRow.length; c++) {
            vRow[c] = MOMENTUM * vRow[c] - spec.learningRate * gRow[c];
            wRow[c] += vRow[c];
          }
          velocity.bias[l][r] =
            MOMENTUM * velocity.bias[l][r] - spec.learningRate * grads.bias[l][r];
          layer.bias[r] += velocity.bias[l][r];
        }
      }
    }
    const holdoutLoss = loss(net, xHold, yHold);
    if (!Number.isFinite(holdoutLoss)) {
      throw new TrainError(`loss became non-finite at epoch ${epoch}`);
    }
    history.trainLoss.push(epochLoss / batches);
    history.holdoutLoss.push(holdoutLoss);
    if (holdoutLoss < bestLoss) {
      bestLoss = holdoutLoss;
      bestEpoch = epoch;
      best = cloneNet(net);
    }
    history.bestSoFar.push(bestLoss);
    if (spec.patience > 0 && epoch - bestEpoch >= spec.patience) {
      break;
    }
  }

  const model: Model = {
    kind: "net",
    inputs: spec.inputs,
    outputs: spec.outputs,
    net: best,
    metadata: {},
  };
  const metrics = validateModelOn(
    model,
    holdRows.map((row) => ({
      inputs: inCols.map((c) => row[c]),
      outputs: outCols.map((c) => row[c]),
    })),
  );
  model.metadata = {
    source: `train ${path.basename(spec.data)}`,
    created: "",
    activation: spec.activation,
    hidden: spec.hidden,
    epochs: spec.epochs,
    epochs_run: epochsRun,
    best_epoch: bestEpoch,
    learning_rate: spec.learningRate,
    momentum: MOMENTUM,
    batch_size: spec.batchSize,
    seed: spec.seed,
    holdout_fraction: spec.holdoutFraction,
    train_rows: trainRows.length,
    holdout_rows: holdRows.length,
    validation: metricsMetadata(metrics),
  };
  return { model, metrics, bestEpoch, epochsRun, history };
}
