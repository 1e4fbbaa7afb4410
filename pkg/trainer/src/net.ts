/**
 * Dense feedforward nets: the trainable half of the model-exchange contract.
 *
 * Layout matches the inference engine exactly: per-input standardization,
 * affine layers (weight rows = outputs) with tanh / relu / identity, a
 * mandatory identity last layer, per-output destandardization. Training and
 * gradient checks operate on the standardized scale; only forward() crosses
 * back into raw units.
 */

export const ACTIVATIONS = ["tanh", "relu", "identity"] as const;
export type Activation = (typeof ACTIVATIONS)[number];

export interface Layer {
  weights: number[][]; // rows = outputs, cols = inputs
  bias: number[];
  activation: Activation;
}

export interface Norm {
  mean: number;
  scale: number;
}

export interface DenseNet {
  layers: Layer[];
  normIn: Norm[];
  normOut: Norm[];
}

export function layerInputs(layer: Layer): number {
  return layer.weights.length > 0 ? layer.weights[0].length : 0;
}

export function validateNet(net: DenseNet): void {
  if (net.layers.length === 0) {
    throw new Error("network needs at least one layer");
  }
  for (const [k, layer] of net.layers.entries()) {
    if (!ACTIVATIONS.includes(layer.activation)) {
      throw new Error(`layer ${k}: unknown activation ${JSON.stringify(layer.activation)}`);
    }
    if (layer.weights.length !== layer.bias.length) {
      throw new Error(
        `layer ${k}: ${layer.weights.length} weight rows but ${layer.bias.length} bias entries`,
      );
    }
    for (const row of layer.weights) {
      if (row.length !== layerInputs(layer)) {
        throw new Error(`layer ${k}: ragged weight matrix`);
      }
    }
  }
  for (let k = 0; k + 1 < net.layers.length; k++) {
    if (layerInputs(net.layers[k + 1]) !== net.layers[k].bias.length) {
      throw new Error(
        `layer ${k} produces ${net.layers[k].bias.length} values but ` +
          `layer ${k + 1} expects ${layerInputs(net.layers[k + 1])}`,
      );
    }
  }
  if (layerInputs(net.layers[0]) !== net.normIn.length) {
    throw new Error(
      `first layer expects ${layerInputs(net.layers[0])} inputs, ` +
        `normalization covers ${net.normIn.length}`,
    );
  }
  if (net.layers[net.layers.length - 1].bias.length !== net.normOut.length) {
    throw new Error(
      `last layer produces ${net.layers[net.layers.length - 1].bias.length} values, ` +
        `denormalization covers ${net.normOut.length}`,
    );
  }
  if (net.layers[net.layers.length - 1].activation !== "identity") {
    throw new Error("last layer activation must be identity");
  }
  for (const { scale } of [...net.normIn, ...net.normOut]) {
    if (!(scale > 0)) {
      throw new Error(`normalization scale must be positive, got ${scale}`);
    }
  }
}

function activate(total: number, act: Activation): number {
  if (act === "tanh") {
    return Math.tanh(total);
  }
  if (act === "relu") {
    return total > 0 ? total : 0;
  }
  return total;
}

/** Forward pass on the standardized scale (no input/output normalization). */
export function forwardStd(net: DenseNet, x: number[]): number[] {
  let a = x;
  for (const layer of net.layers) {
    const next: number[] = new Array(layer.bias.length);
    for (let r = 0; r < layer.bias.length; r++) {
      // bias first, then weights left to right: mirrors the engine's order
      let total = layer.bias[r];
      const row = layer.weights[r];
      for (let c = 0; c < row.length; c++) {
        total += row[c] * a[c];
      }
      next[r] = activate(total, layer.activation);
    }
    a = next;
  }
  return a;
}

/** Raw-unit forward pass, identical to the engine's eval_net. */
export function forward(net: DenseNet, inputs: number[]): number[] {
  if (inputs.length !== net.normIn.length) {
    throw new Error(`expected ${net.normIn.length} inputs, got ${inputs.length}`);
  }
  const x = inputs.map((v, i) => (v - net.normIn[i].mean) / net.normIn[i].scale);
  const y = forwardStd(net, x);
  return y.map((v, j) => net.normOut[j].mean + net.normOut[j].scale * v);
}

export interface Gradients {
  weights: number[][][]; // per layer, same shape as Layer.weights
  bias: number[][];
}

export function zeroGradients(net: DenseNet): Gradients {
  return {
    weights: net.layers.map((l) => l.weights.map((row) => row.map(() => 0))),
    bias: net.layers.map((l) => l.bias.map(() => 0)),
  };
}

/**
 * Loss and parameter gradients on a standardized batch.
 *
 * Loss is sum of squared errors over outputs and samples, divided by 2N,
 * so for a single sample at zero input the bias gradient of the (identity)
 * output layer is exactly the residual.
 */
export function lossAndGradients(
  net: DenseNet,
  xs: number[][],
  ys: number[][],
  grads?: Gradients,
): { loss: number; grads: Gradients } {
  const n = xs.length;
  if (n === 0) {
    throw new Error("empty batch");
  }
  const g = grads ?? zeroGradients(net);
  let sse = 0;
  for (let s = 0; s < n; s++) {
    // forward, keeping each layer's activations for the backward sweep
    const acts: number[][] = [xs[s]];
    for (const layer of net.layers) {
      const prev = acts[acts.length - 1];
      const next: number[] = new Array(layer.bias.length);
      for (let r = 0; r < layer.bias.length; r++) {
        let total = layer.bias[r];
        const row = layer.weights[r];
        for (let c = 0; c < row.length; c++) {
          total += row[c] * prev[c];
        }
        next[r] = activate(total, layer.activation);
      }
      acts.push(next);
    }
    const out = acts[acts.length - 1];
    let delta: number[] = new Array(out.length);
    for (let j = 0; j < out.length; j++) {
      const e = out[j] - ys[s][j];
      sse += e * e;
      delta[j] = e / n; // d(loss)/d(pre-activation), output layer is identity
    }
    for (let l = net.layers.length - 1; l >= 0; l--) {
      const layer = net.layers[l];
      const below = acts[l];
      for (let r = 0; r < layer.bias.length; r++) {
        const d = delta[r];
        g.bias[l][r] += d;
        const gRow = g.weights[l][r];
        for (let c = 0; c < below.length; c++) {
          gRow[c] += d * below[c];
        }
      }
      if (l === 0) {
        break;
      }
      const lower = net.layers[l - 1];
      const next: number[] = new Array(below.length);
      for (let c = 0; c < below.length; c++) {
        let total = 0;
        for (let r = 0; r < layer.bias.length; r++) {
          total += layer.weights[r][c] * delta[r];
        }
        if (lower.activation === "tanh") {
          total *= 1 - below[c] * below[c];
        } else if (lower.activation === "relu") {
          total = below[c] > 0 ? total : 0;
        }
        next[c] = total;
      }
      delta = next;
    }
  }
  return { loss: sse / (2 * n), grads: g };
}

/** Loss alone (same definition as lossAndGradients). */
export function loss(net: DenseNet, xs: number[][], ys: number[][]): number {
  let sse = 0;
  for (let s = 0; s < xs.length; s++) {
    const out = forwardStd(net, xs[s]);
    for (let j = 0; j < out.length; j++) {
      const e = out[j] - ys[s][j];
      sse += e * e;
    }
  }
  return sse / (2 * xs.length);
}

export function cloneNet(net: DenseNet): DenseNet {
  return {
    layers: net.layers.map((l) => ({
      weights: l.weights.map((row) => row.slice()),
      bias: l.bias.slice(),
      activation: l.activation,
    })),
    normIn: net.normIn.map((n) => ({ ...n })),
    normOut: net.normOut.map((n) => ({ ...n })),
  };
}

/** Number of trainable parameters (weights and biases). */
export function paramCount(net: DenseNet): number {
  let count = 0;
  for (const layer of net.layers) {
    count += layer.bias.length * (1 + layerInputs(layer));
  }
  return count;
}

/** Read parameter by flat index: per layer, weights row-major, then bias. */
export function getParam(net: DenseNet, index: number): number {
  for (const layer of net.layers) {
    const w = layer.bias.length * layerInputs(layer);
    if (index < w) {
      const cols = layerInputs(layer);
      return layer.weights[Math.floor(index / cols)][index % cols];
    }
    index -= w;
    if (index < layer.bias.length) {
      return layer.bias[index];
    }
    index -= layer.bias.length;
  }
  throw new Error(`parameter index out of range`);
}

export function setParam(net: DenseNet, index: number, value: number): void {
  for (const layer of net.layers) {
    const w = layer.bias.length * layerInputs(layer);
    if (index < w) {
      const cols = layerInputs(layer);
      layer.weights[Math.floor(index / cols)][index % cols] = value;
      return;
    }
    index -= w;
    if (index < layer.bias.length) {
      layer.bias[index] = value;
      return;
    }
    index -= layer.bias.length;
  }
  throw new Error(`parameter index out of range`);
}

/** Gradient entry matching getParam's flat indexing. */
export function getGradient(grads: Gradients, net: DenseNet, index: number): number {
  for (let l = 0; l < net.layers.length; l++) {
    const layer = net.layers[l];
    const w = layer.bias.length * layerInputs(layer);
    if (index < w) {
      const cols = layerInputs(layer);
      return grads.weights[l][Math.floor(index / cols)][index % cols];
    }
    index -= w;
    if (index < layer.bias.length) {
      return grads.bias[l][index];
    }
    index -= layer.bias.length;
  }
  throw new Error(`parameter index out of range`);
}
