/**
 * Gradient verification by central finite differences.
 *
 * The analytic backprop gradient of the training loss is compared against
 * (L(p + h) - L(p - h)) / 2h for every parameter, with h = 1e-6 on the
 * standardized scale. Points should avoid relu kinks; tanh and identity
 * nets are smooth everywhere.
 */

import {
  DenseNet,
  Gradients,
  getGradient,
  getParam,
  loss,
  lossAndGradients,
  paramCount,
  setParam,
} from "./net";

export interface GradCheckResult {
  maxRelError: number;
  worstParam: number;
  analytic: number;
  numeric: number;
}

export function gradientCheck(
  net: DenseNet,
  xs: number[][],
  ys: number[][],
  step = 1e-6,
): GradCheckResult {
  const { grads } = lossAndGradients(net, xs, ys);
  return compareGradients(net, grads, xs, ys, step);
}

function compareGradients(
  net: DenseNet,
  grads: Gradients,
  xs: number[][],
  ys: number[][],
  step: number,
): GradCheckResult {
  const count = paramCount(net);
  const result: GradCheckResult = {
    maxRelError: 0,
    worstParam: -1,
    analytic: 0,
    numeric: 0,
  };
  for (let p = 0; p < count; p++) {
    const saved = getParam(net, p);
    setParam(net, p, saved + step);
    const up = loss(net, xs, ys);
    setParam(net, p, saved - step);
    const down = loss(net, xs, ys);
    setParam(net, p, saved);
    const numeric = (up - down) / (2 * step);
    const analytic = getGradient(grads, net, p);
    const scale = Math.max(1e-8, Math.abs(analytic), Math.abs(numeric));
    const rel = Math.abs(analytic - numeric) / scale;
    if (rel > result.maxRelError) {
      result.maxRelError = rel;
      result.worstParam = p;
      result.analytic = analytic;
      result.numeric = numeric;
    }
  }
  return result;
}
