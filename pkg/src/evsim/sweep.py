"""Input sweeps over a component's algebraic core.

A sweep evaluates the quasi-static map a surrogate would replace (battery
terminal voltage, inverter efficiency, motor loss, thermal steady-state
temperatures) over a configured grid and writes the samples as CSV.  The
first line is a comment naming each column with its unit, the second is a
plain header, then one row per grid point with the last axis varying
fastest.  Optional seeded jitter displaces points off the nodes for
training data that does not simply memorise the grid.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .battery import ocv
from .errors import ConfigError
from .inverter import inverter_efficiency
from .scenario import ScenarioConfig
from .tables import Axis

SWEPT_COMPONENTS = ("battery", "inverter", "motor", "thermal")


@dataclass
class SweepGrid:
    axes: list[Axis]
    jitter_rel: float = 0.0
    jitter_seed: int = 0


def load_grid(path) -> SweepGrid:
    """Read a grid spec: [[axis]] tables plus an optional [jitter] table.

    Each axis gives explicit `coords` or a `min`/`max`/`count` range.
    """
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read grid spec {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML syntax error: {exc}") from None
    unknown = sorted(set(doc) - {"axis", "jitter"})
    if unknown:
        raise ConfigError(f"{path}: unknown key(s): {', '.join(unknown)}")
    specs = doc.get("axis")
    if not isinstance(specs, list) or not specs:
        raise ConfigError(f"{path}: needs at least one [[axis]] table")
    axes = []
    for k, spec in enumerate(specs):
        loc = f"{path}: axis[{k}]"
        if not isinstance(spec, dict):
            raise ConfigError(f"{loc}: expected a table")
        unknown = sorted(set(spec) - {"name", "unit", "coords", "min", "max",
                                      "count"})
        if unknown:
            raise ConfigError(f"{loc}: unknown key(s): {', '.join(unknown)}")
        name = spec.get("name")
        unit = spec.get("unit", "1")
        if not isinstance(name, str) or not isinstance(unit, str):
            raise ConfigError(f"{loc}: needs a string name (and unit)")
        if "coords" in spec:
            coords = spec["coords"]
            if not isinstance(coords, list) or not coords:
                raise ConfigError(f"{loc}: coords must be a non-empty list")
            coords = [float(c) for c in coords]
        else:
            try:
                lo, hi = float(spec["min"]), float(spec["max"])
                count = spec["count"]
            except KeyError as exc:
                raise ConfigError(f"{loc}: needs coords or min/max/count "
                                  f"(missing {exc})") from None
            if not isinstance(count, int) or isinstance(count, bool) or count < 2:
                raise ConfigError(f"{loc}: count must be an integer >= 2")
            if not lo < hi:
                raise ConfigError(f"{loc}: min must be below max")
            step = (hi - lo) / (count - 1)
            coords = [lo + i * step for i in range(count - 1)] + [hi]
        try:
            axes.append(Axis(name, unit, coords))
        except ValueError as exc:
            raise ConfigError(f"{loc}: {exc}") from None
    jitter = doc.get("jitter", {})
    unknown = sorted(set(jitter) - {"rel", "seed"})
    if unknown:
        raise ConfigError(f"{path}: [jitter] unknown key(s): {', '.join(unknown)}")
    rel = float(jitter.get("rel", 0.0))
    if not 0.0 <= rel < 0.5:
        raise ConfigError(f"{path}: [jitter] rel must be in [0, 0.5)")
    seed = jitter.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"{path}: [jitter] seed must be an integer")
    return SweepGrid(axes, rel, seed)


def sweep_points(grid: SweepGrid) -> list[tuple[float, ...]]:
    """Cartesian product of the axes, last axis fastest, jitter applied.

    Jitter moves each coordinate toward a neighbouring node by up to
    `rel` of the local spacing; edge nodes only move inward, so points
    never leave the grid's hull.
    """
    base = list(itertools.product(*(a.coords for a in grid.axes)))
    if grid.jitter_rel == 0.0:
        return base
    rng = random.Random(grid.jitter_seed)
    out = []
    for point in base:
        moved = []
        for value, axis in zip(point, grid.axes):
            coords = axis.coords
            i = coords.index(value)
            u = rng.uniform(-1.0, 1.0)
            if u >= 0.0:
                gap = coords[i + 1] - value if i + 1 < len(coords) else 0.0
            else:
                gap = value - coords[i - 1] if i > 0 else 0.0
            moved.append(value + u * grid.jitter_rel * gap)
        out.append(tuple(moved))
    return out


def _require_axes(grid: SweepGrid, expected, component):
    got = [(a.name, a.unit) for a in grid.axes]
    if got != list(expected):
        want = ", ".join(f"{n} [{u}]" for n, u in expected)
        have = ", ".join(f"{n} [{u}]" for n, u in got)
        raise ConfigError(
            f"sweep of {component!r} needs axes ({want}), grid has ({have})"
        )


def run_sweep(cfg: ScenarioConfig, component: str, grid: SweepGrid):
    """Evaluate one component's quasi-static core over the grid.

    Returns (input tags, output tags, rows); tags are (name, unit) pairs
    and each row concatenates the swept point with the outputs.
    """
    if component == "battery":
        _require_axes(grid, (("soc", "1"), ("i_dc", "A"), ("t_cell", "K")),
                      component)
        params = cfg.battery
        lo, hi = params.ocv_table.axes[0].coords[0], params.ocv_table.axes[0].coords[-1]
        for soc in grid.axes[0].coords:
            if not lo <= soc <= hi:
                raise ConfigError(
                    f"sweep soc {soc} outside the OCV table range [{lo}, {hi}]"
                )
        out_tags = [("v_term", "V")]

        def evaluate(point):
            soc, i_dc, t_cell = point
            return (ocv(params, soc) - i_dc * params.r0_table.eval((soc, t_cell)),)

    elif component == "inverter":
        _require_axes(grid, (("speed", "rad/s"), ("torque", "N*m")), component)
        _require_nonneg(grid, component)
        params = cfg.inverter
        out_tags = [("eff", "1")]

        def evaluate(point):
            return (inverter_efficiency(params, point[0], point[1]),)

    elif component == "motor":
        _require_axes(grid, (("speed", "rad/s"), ("torque", "N*m")), component)
        _require_nonneg(grid, component)
        loss_map = cfg.motor.loss_map
        out_tags = [("loss_w", "W")]

        def evaluate(point):
            return (loss_map.eval(point),)

    elif component == "thermal":
        net = cfg.thermal
        _require_axes(grid, tuple((f"q_{nid}", "W") for nid in net.node_ids),
                      component)
        out_tags = [(f"t_{nid}", "K") for nid in net.node_ids]

        def evaluate(point):
            return net.steady_state(point)

    else:
        raise ConfigError(
            f"unknown sweep component {component!r}; pick one of "
            + ", ".join(SWEPT_COMPONENTS)
        )

    in_tags = [(a.name, a.unit) for a in grid.axes]
    rows = [tuple(point) + tuple(evaluate(point)) for point in sweep_points(grid)]
    return in_tags, out_tags, rows


def _require_nonneg(grid, component):
    for axis in grid.axes:
        if axis.coords[0] < 0.0:
            raise ConfigError(
                f"sweep of {component!r}: axis {axis.name} must be non-negative "
                f"(maps are mirrored about zero at evaluation time)"
            )


# --- sweep CSV ------------------------------------------------------------


def write_sweep_csv(path, in_tags, out_tags, rows) -> None:
    tags = list(in_tags) + list(out_tags)
    lines = ["# " + ", ".join(f"{n} [{u}]" for n, u in tags)]
    lines.append(",".join(n for n, _ in tags))
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sweep_csv(path):
    """Returns ([(name, unit), ...], [row tuples]) from a sweep CSV."""
    try:
        with open(path, "r", newline="") as fh:
            lines = [ln.strip("\r\n") for ln in fh]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    lines = [ln for ln in lines if ln.strip()]
    if len(lines) < 3 or not lines[0].startswith("#"):
        raise ConfigError(
            f"{path}: expected a '# name [unit], ...' comment line, a header "
            f"line, and at least one data row"
        )
    tags = []
    for part in lines[0][1:].split(","):
        part = part.strip()
        if not (part.endswith("]") and "[" in part):
            raise ConfigError(f"{path}: malformed column annotation {part!r}")
        name, unit = part[:-1].split("[", 1)
        tags.append((name.strip(), unit.strip()))
    header = [h.strip() for h in lines[1].split(",")]
    if header != [n for n, _ in tags]:
        raise ConfigError(
            f"{path}: header {header} does not match the annotated columns "
            f"{[n for n, _ in tags]}"
        )
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split(",")
        if len(parts) != len(tags):
            raise ConfigError(
                f"{path}: line {lineno}: expected {len(tags)} fields, "
                f"got {len(parts)}"
            )
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ConfigError(
                f"{path}: line {lineno}: malformed number"
            ) from None
    return tags, rows
