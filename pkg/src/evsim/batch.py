"""Parallel batch runs over a set of scenario configs.

Configs are matched by glob, run in sorted-path order across a process
pool, and summarised one row per scenario.  A scenario that fails leaves
an error row and does not stop the rest of the batch.
"""

from __future__ import annotations

import csv
import glob as globlib
from concurrent.futures import ProcessPoolExecutor

from .errors import ConfigError, EvsimError
from .scenario import load_scenario, run_scenario

SUMMARY_FIELDS = (
    "config", "status", "scenario", "duration_s", "distance_m",
    "battery_energy_wh", "wh_per_km", "soc_end", "speed_error_max_mps",
    "error",
)


def run_one(path: str) -> dict:
    """Run a single scenario; never raises, failures land in the row."""
    row = {field: "" for field in SUMMARY_FIELDS}
    row["config"] = path
    try:
        cfg = load_scenario(path)
        _, report = run_scenario(cfg)
    except EvsimError as exc:
        row["status"] = "error"
        row["error"] = str(exc)
        return row
    except Exception as exc:  # keep the rest of the batch alive
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row["status"] = "ok"
    row["scenario"] = report["scenario"]
    row["duration_s"] = report["duration_s"]
    row["distance_m"] = report["distance_m"]
    row["battery_energy_wh"] = report["battery_energy_wh"]
    wh_km = report["wh_per_km"]
    row["wh_per_km"] = "" if wh_km is None else wh_km
    row["soc_end"] = report["soc_end"]
    row["speed_error_max_mps"] = report["violations"]["speed_error_max_mps"]
    return row


def run_batch(pattern: str, jobs: int, out_path) -> int:
    """Run every config matching `pattern`; returns the failure count.

    Rows are written in sorted config-path order whatever the completion
    order, so reruns produce identical files.
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be at least 1, got {jobs}")
    paths = sorted(globlib.glob(pattern))
    if not paths:
        raise ConfigError(f"no configs match {pattern!r}")
    if jobs == 1 or len(paths) == 1:
        rows = [run_one(p) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_one, paths))
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(SUMMARY_FIELDS))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return sum(1 for row in rows if row["status"] != "ok")
