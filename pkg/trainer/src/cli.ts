/**
 * Command-line entry points: train, check-grad, validate.
 *
 * Exit codes: 0 success, 1 configuration or input-data error, 2 runtime
 * error during training or while writing results.
 */

import { parseArgs } from "node:util";

import { DataError, readSweepCsv } from "./data";
import { gradientCheck } from "./gradcheck";
import { metricsLine, validateModelOn, MetricsError } from "./metrics";
import { ModelFormatError, loadModel, saveModel } from "./modelfile";
import { gFormat } from "./pyfmt";
import { mulberry32, uniform } from "./rng";
import { SpecError, TrainError, loadTrainSpec, trainNet } from "./train";
import { forwardStd } from "./net";

const USAGE = `usage: evsim-train <command> ...

commands:
  train      --spec <file> --out <model>     train a net from a sweep CSV
  check-grad --model <file> [--tol <x>] [--seed <n>]
                                             verify gradients by finite differences
  validate   --model <file> --holdout <csv>  score a model against holdout data
`;

function cmdTrain(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      spec: { type: "string" },
      out: { type: "string" },
    },
  });
  if (!values.spec || !values.out) {
    process.stderr.write("error: train needs --spec and --out\n");
    return 1;
  }
  const spec = loadTrainSpec(values.spec);
  const result = trainNet(spec);
  saveModel(result.model, values.out);
  console.log(
    `wrote ${values.out}: ${result.epochsRun} epochs ` +
      `(best checkpoint at epoch ${result.bestEpoch})`,
  );
  for (const m of result.metrics) {
    console.log(`holdout ${metricsLine(m)}`);
  }
  return 0;
}

function cmdCheckGrad(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: "string" },
      tol: { type: "string" },
      seed: { type: "string" },
    },
  });
  if (!values.model) {
    process.stderr.write("error: check-grad needs --model\n");
    return 1;
  }
  const tol = values.tol !== undefined ? Number(values.tol) : 1e-4;
  if (!(tol > 0)) {
    process.stderr.write(`error: bad tolerance ${values.tol}\n`);
    return 1;
  }
  const model = loadModel(values.model);
  if (model.kind !== "net") {
    process.stderr.write(
      `error: model kind is ${model.kind}; gradient check needs a net\n`,
    );
    return 1;
  }
  const net = model.net!;
  const rng = mulberry32(values.seed !== undefined ? Number(values.seed) : 0);
  const xs: number[][] = [];
  const ys: number[][] = [];
  for (let s = 0; s < 8; s++) {
    const x = net.normIn.map(() => uniform(rng, -1.5, 1.5));
    // offset targets so residuals (and hence gradients) are nonzero
    const y = forwardStd(net, x).map((v) => v + uniform(rng, -0.5, 0.5));
    xs.push(x);
    ys.push(y);
  }
  const check = gradientCheck(net, xs, ys);
  console.log(
    `max relative gradient error ${gFormat(check.maxRelError)} ` +
      `(parameter ${check.worstParam}: analytic ${gFormat(check.analytic)}, ` +
      `numeric ${gFormat(check.numeric)})`,
  );
  if (check.maxRelError > tol) {
    process.stderr.write(`error: gradient error exceeds tolerance ${gFormat(tol)}\n`);
    return 1;
  }
  return 0;
}

function cmdValidate(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: "string" },
      holdout: { type: "string" },
    },
  });
  if (!values.model || !values.holdout) {
    process.stderr.write("error: validate needs --model and --holdout\n");
    return 1;
  }
  const model = loadModel(values.model);
  const data = readSweepCsv(values.holdout);
  const indexOf = (name: string) => {
    const idx = data.tags.findIndex((t) => t.name === name);
    if (idx < 0) {
      const have = data.tags.map((t) => t.name).join(", ");
      throw new DataError(
        `${values.holdout}: missing column ${name}; file has ${have}`,
      );
    }
    return idx;
  };
  const inIdx = model.inputs.map((p) => indexOf(p.name));
  const outIdx = model.outputs.map((p) => indexOf(p.name));
  const pairs = data.rows.map((row) => ({
    inputs: inIdx.map((i) => row[i]),
    outputs: outIdx.map((i) => row[i]),
  }));
  for (const m of validateModelOn(model, pairs)) {
    console.log(metricsLine(m));
  }
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "train") {
      return cmdTrain(rest);
    }
    if (command === "check-grad") {
      return cmdCheckGrad(rest);
    }
    if (command === "validate") {
      return cmdValidate(rest);
    }
    process.stderr.write(USAGE);
    return 1;
  } catch (err) {
    if (
      err instanceof SpecError ||
      err instanceof DataError ||
      err instanceof ModelFormatError ||
      err instanceof MetricsError
    ) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if (err instanceof TrainError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    if (
      err instanceof Error &&
      "code" in err &&
      String((err as { code: unknown }).code).startsWith("ERR_PARSE_ARGS")
    ) {
      // bad command-line flags are a usage error, not a runtime failure
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      // filesystem errors carry a code (ENOENT, EACCES, ...)
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
