"""Drive-cycle ingestion and the target-speed source component."""

from __future__ import annotations

import csv
import os
from bisect import bisect_right
from dataclasses import dataclass

from .core import Component, PortSpec
from .errors import ConfigError


@dataclass(frozen=True)
class DriveCycle:
    name: str
    times: tuple[float, ...]
    speeds: tuple[float, ...]

    @property
    def duration(self) -> float:
        return self.times[-1]


def load_drive_cycle(path) -> DriveCycle:
    """Parse a `time_s,speed_mps` CSV; errors carry the file line number."""
    times, speeds = [], []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read drive cycle {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        if [h.strip() for h in header] != ["time_s", "speed_mps"]:
            raise ConfigError(
                f"{path}: line 1: expected header 'time_s,speed_mps', "
                f"got {','.join(header)!r}"
            )
        for line, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ConfigError(f"{path}: line {line}: expected 2 fields, got {len(row)}")
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                raise ConfigError(
                    f"{path}: line {line}: malformed number in {','.join(row)!r}"
                ) from None
            if times and t <= times[-1]:
                raise ConfigError(
                    f"{path}: line {line}: time {t:g} not increasing "
                    f"(previous {times[-1]:g})"
                )
            if not times and t != 0.0:
                raise ConfigError(f"{path}: line {line}: cycle must start at time 0")
            if v < 0:
                raise ConfigError(f"{path}: line {line}: negative speed {v:g}")
            times.append(t)
            speeds.append(v)
    if len(times) < 2:
        raise ConfigError(f"{path}: a drive cycle needs at least 2 samples")
    return DriveCycle(os.path.splitext(os.path.basename(str(path)))[0],
                      tuple(times), tuple(speeds))


def speed_at(cycle: DriveCycle, t: float) -> float:
    """Linear interpolation; held constant beyond either end."""
    times = cycle.times
    if t <= times[0]:
        return cycle.speeds[0]
    if t >= times[-1]:
        return cycle.speeds[-1]
    i = bisect_right(times, t) - 1
    w = (t - times[i]) / (times[i + 1] - times[i])
    return cycle.speeds[i] + w * (cycle.speeds[i + 1] - cycle.speeds[i])


class CycleComponent(Component):
    """Emits the cycle's target speed at each step's output timestamp."""

    PORTS = [PortSpec("v_target", "out", "m/s")]

    def __init__(self, component_id, cycle: DriveCycle):
        super().__init__(component_id, self.PORTS)
        self.cycle = cycle

    def initial_state(self):
        return 0  # completed steps

    def initial_outputs(self, state):
        return {"v_target": speed_at(self.cycle, 0.0)}

    def step(self, inputs, state, dt):
        n = state + 1
        return {"v_target": speed_at(self.cycle, n * dt)}, n
