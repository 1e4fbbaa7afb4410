"""Command-line entry points.

Exit codes: 0 success, 1 configuration or input-data error, 2 runtime
error during a run or while writing results, 3 batch completed with some
scenarios failing.
"""

from __future__ import annotations

import argparse
import os
import sys

from .batch import run_batch
from .errors import (ConfigError, CoverageError, EvsimError, GraphError,
                     ModelFormatError, StepError)
from .scenario import load_scenario, report_text, run_scenario, write_report
from .surrogate import (PortTag, load_model, metrics_metadata, save_model,
                        table_model, validate)
from .sweep import load_grid, read_sweep_csv, run_sweep, write_sweep_csv
from .tables import fit_table


def _cmd_simulate(args) -> int:
    cfg = load_scenario(args.config)
    trace, report = run_scenario(cfg)
    trace_path = args.trace or cfg.trace_path
    report_path = args.report or cfg.report_path
    if trace_path:
        trace.to_csv(trace_path)
        print(f"wrote trace {trace_path} ({len(trace.rows)} rows)")
    if report_path:
        write_report(report, report_path)
        print(f"wrote report {report_path}")
    else:
        sys.stdout.write(report_text(report))
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_scenario(args.config)
    grid = load_grid(args.grid)
    in_tags, out_tags, rows = run_sweep(cfg, args.component, grid)
    write_sweep_csv(args.out, in_tags, out_tags, rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _select_columns(tags, names, path):
    index = {name: i for i, (name, _) in enumerate(tags)}
    missing = [n for n in names if n not in index]
    if missing:
        raise ConfigError(
            f"{path}: missing column(s) {', '.join(missing)}; "
            f"file has {', '.join(n for n, _ in tags)}"
        )
    return [index[n] for n in names]


def _cmd_fit_table(args) -> int:
    tags, rows = read_sweep_csv(args.data)
    grid = load_grid(args.axes)
    axes = grid.axes
    in_names = [a.name for a in axes]
    in_idx = _select_columns(tags, in_names, args.data)
    for axis, i in zip(axes, in_idx):
        if axis.unit != tags[i][1]:
            raise ConfigError(
                f"axis {axis.name} is [{axis.unit}] in {args.axes} but "
                f"[{tags[i][1]}] in {args.data}"
            )
    remaining = [n for n, _ in tags if n not in in_names]
    if args.output is not None:
        target = args.output
    elif len(remaining) == 1:
        target = remaining[0]
    else:
        raise ConfigError(
            f"{args.data} has several non-axis columns "
            f"({', '.join(remaining)}); pick one with --output"
        )
    (out_idx,) = _select_columns(tags, [target], args.data)
    samples = [(tuple(r[i] for i in in_idx), r[out_idx]) for r in rows]
    result = fit_table(samples, axes)
    metadata = {
        "source": f"fit-table {os.path.basename(args.data)}",
        "created": "",
    }
    out_tag = PortTag(*tags[out_idx])
    model = table_model(result.table, out_tag, metadata)
    if args.holdout:
        h_tags, h_rows = read_sweep_csv(args.holdout)
        h_in = _select_columns(h_tags, in_names, args.holdout)
        (h_out,) = _select_columns(h_tags, [target], args.holdout)
        pairs = [(tuple(r[i] for i in h_in), (r[h_out],)) for r in h_rows]
        metrics = validate(model, pairs)
        metadata["validation"] = metrics_metadata(metrics)
        model = table_model(result.table, out_tag, metadata)
        for m in metrics:
            print(f"holdout {m.name}: rmse={m.rmse:.6g} "
                  f"max_abs_err={m.max_abs_err:.6g} "
                  f"r2={'n/a' if m.r2 is None else format(m.r2, '.6g')}")
    save_model(model, args.out)
    least = min(result.node_counts)
    print(f"wrote {args.out}: {len(samples)} samples over "
          f"{len(result.node_counts)} nodes (sparsest node has {least})")
    return 0


def _cmd_validate(args) -> int:
    model = load_model(args.model)
    tags, rows = read_sweep_csv(args.holdout)
    in_idx = _select_columns(tags, [p.name for p in model.inputs], args.holdout)
    out_idx = _select_columns(tags, [p.name for p in model.outputs], args.holdout)
    pairs = [
        (tuple(r[i] for i in in_idx), tuple(r[i] for i in out_idx))
        for r in rows
    ]
    for m in validate(model, pairs):
        print(f"{m.name}: rmse={m.rmse:.6g} max_abs_err={m.max_abs_err:.6g} "
              f"r2={'n/a' if m.r2 is None else format(m.r2, '.6g')}")
    return 0


def _cmd_batch(args) -> int:
    failures = run_batch(args.configs, args.jobs, args.out)
    print(f"wrote {args.out}" + (f" ({failures} failed)" if failures else ""))
    return 3 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evsim",
        description="Fixed-step EV powertrain co-simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario")
    p.add_argument("--config", required=True, help="scenario TOML")
    p.add_argument("--trace", help="write the signal trace CSV here")
    p.add_argument("--report", help="write the energy report JSON here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="sample a component's quasi-static map")
    p.add_argument("--config", required=True, help="scenario TOML")
    p.add_argument("--component", required=True,
                   help="battery, inverter, motor, or thermal")
    p.add_argument("--grid", required=True, help="grid spec TOML")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fit-table", help="fit a grid table to swept samples")
    p.add_argument("--data", required=True, help="sweep CSV")
    p.add_argument("--axes", required=True, help="grid spec TOML naming the axes")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--output", help="target column when the CSV has several")
    p.add_argument("--holdout", help="CSV scored into the model's metadata")
    p.set_defaults(func=_cmd_fit_table)

    p = sub.add_parser("validate", help="score a model against holdout data")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--holdout", required=True, help="holdout CSV")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("batch", help="run many scenarios in parallel")
    p.add_argument("--configs", required=True, help="glob of scenario TOMLs")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="summary CSV")
    p.set_defaults(func=_cmd_batch)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ModelFormatError, GraphError, CoverageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EvsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
