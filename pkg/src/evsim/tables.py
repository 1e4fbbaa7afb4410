"""Regular-grid lookup tables with multilinear interpolation.

Tables are defined on rectilinear grids with strictly increasing (not
necessarily uniform) axes, 1 to 4 dimensions.  Queries outside an axis
range are clamped to that range before interpolating, so evaluation is
total and bounded by the stored values.  The scalar evaluator is written
against plain Python lists: it sits inside per-step simulation loops where
array round-trips would dominate the cost.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

from .errors import CoverageError

MAX_DIMS = 4


@dataclass(frozen=True)
class Axis:
    """One grid coordinate: a name, a unit tag and its node positions."""

    name: str
    unit: str
    coords: tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise ValueError(f"axis {self.name}: needs at least one node")
        if not all(math.isfinite(c) for c in self.coords):
            raise ValueError(f"axis {self.name}: non-finite coordinate")
        for a, b in zip(self.coords, self.coords[1:]):
            if not b > a:
                raise ValueError(f"axis {self.name}: coords not strictly increasing")


class GridTable:
    """Dense values over the grid, row-major with the last axis fastest."""

    def __init__(self, axes: list[Axis] | tuple[Axis, ...], values):
        axes = tuple(axes)
        if not 1 <= len(axes) <= MAX_DIMS:
            raise ValueError(f"table must have 1..{MAX_DIMS} axes, got {len(axes)}")
        flat = [float(v) for v in _flatten(values)]
        shape = tuple(len(ax.coords) for ax in axes)
        expected = math.prod(shape)
        if len(flat) != expected:
            raise ValueError(
                f"value count {len(flat)} != product of axis lengths {expected}"
            )
        if not all(math.isfinite(v) for v in flat):
            raise ValueError("table contains non-finite values")
        self.axes = axes
        self.shape = shape
        self.values = flat
        strides = [1] * len(shape)
        for i in range(len(shape) - 2, -1, -1):
            strides[i] = strides[i + 1] * shape[i + 1]
        self._strides = tuple(strides)
        self._coords = tuple(list(ax.coords) for ax in axes)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def __call__(self, *point: float) -> float:
        return self.eval(point)

    def eval(self, point) -> float:
        """Multilinear interpolation at one point, clamped to the grid.

        Exact at grid nodes.  1-D and 2-D queries take fast inline paths;
        higher dimensions use the general corner expansion.
        """
        coords = self._coords
        if len(point) != len(coords):
            raise ValueError(
                f"query has {len(point)} coordinates, table has {len(coords)} axes"
            )
        values = self.values
        if len(coords) == 1:
            i, w = _locate(coords[0], point[0])
            return values[i] * (1.0 - w) + values[i + 1] * w if w else values[i]
        if len(coords) == 2:
            i, wi = _locate(coords[0], point[0])
            j, wj = _locate(coords[1], point[1])
            n1 = self.shape[1]
            base = i * n1 + j
            v00 = values[base]
            v01 = values[base + 1] if wj else v00
            if wi:
                v10 = values[base + n1]
                v11 = values[base + n1 + 1] if wj else v10
            else:
                v10, v11 = v00, v01
            return (
                v00 * (1.0 - wi) * (1.0 - wj)
                + v01 * (1.0 - wi) * wj
                + v10 * wi * (1.0 - wj)
                + v11 * wi * wj
            )
        # generic 3-D / 4-D corner walk
        cells = [_locate(axis, x) for axis, x in zip(coords, point)]
        strides = self._strides
        total = 0.0
        for corner in range(1 << len(cells)):
            weight = 1.0
            offset = 0
            for d, (i, w) in enumerate(cells):
                if corner >> d & 1:
                    weight *= w
                    offset += (i + 1) * strides[d]
                else:
                    weight *= 1.0 - w
                    offset += i * strides[d]
            if weight:
                total += weight * values[offset]
        return total

    def node_value(self, indices) -> float:
        offset = 0
        for i, s in zip(indices, self._strides):
            offset += i * s
        return self.values[offset]

    def min_value(self) -> float:
        return min(self.values)

    def max_value(self) -> float:
        return max(self.values)


def _locate(coords: list[float], x: float) -> tuple[int, float]:
    """Cell index and fractional position for one axis, clamping x.

    Returns (i, w) with the query at coords[i] + w * (coords[i+1] -
    coords[i]); w == 0.0 exactly when the query clamps low or hits a node,
    which lets the evaluator skip upper-corner reads on degenerate axes.
    """
    n = len(coords)
    if n == 1 or x <= coords[0]:
        return 0, 0.0
    if x >= coords[-1]:
        return n - 2, 1.0
    i = bisect_right(coords, x) - 1
    lo = coords[i]
    return i, (x - lo) / (coords[i + 1] - lo)


def _flatten(values):
    if isinstance(values, (int, float)):
        yield values
        return
    for item in values:
        if isinstance(item, (int, float)):
            yield item
        else:
            yield from _flatten(item)


@dataclass
class FitResult:
    """Fitted table plus per-node sample counts."""

    table: GridTable
    node_counts: list[int] = field(default_factory=list)


def fit_table(samples, axes: list[Axis]) -> FitResult:
    """Fit a grid table by nearest-node binning with per-node averaging.

    ``samples`` is a sequence of (inputs, output) pairs; each sample is
    assigned to the grid node nearest to its inputs and must lie within
    half a cell of that node on every axis.  Every node needs at least one
    sample; uncovered nodes are reported by their coordinates.
    """
    axes = list(axes)
    shape = tuple(len(ax.coords) for ax in axes)
    strides = [1] * len(shape)
    for i in range(len(shape) - 2, -1, -1):
        strides[i] = strides[i + 1] * shape[i + 1]
    n_nodes = math.prod(shape)
    sums = [0.0] * n_nodes
    counts = [0] * n_nodes

    for inputs, output in samples:
        if len(inputs) != len(axes):
            raise ValueError(
                f"sample has {len(inputs)} inputs, axes expect {len(axes)}"
            )
        offset = 0
        for x, ax, stride in zip(inputs, axes, strides):
            idx = _nearest_node(ax, x)
            if idx is None:
                raise ValueError(
                    f"sample coordinate {x!r} on axis {ax.name!r} is farther "
                    "than half a cell from every grid node"
                )
            offset += idx * stride
        sums[offset] += float(output)
        counts[offset] += 1

    missing = [i for i, c in enumerate(counts) if c == 0]
    if missing:
        named = [
            "(" + ", ".join(
                f"{ax.name}={ax.coords[j]!r}"
                for ax, j in zip(axes, _unravel(i, shape))
            ) + ")"
            for i in missing[:5]
        ]
        raise CoverageError(
            f"{len(missing)} grid node(s) have no samples, e.g. {', '.join(named)}"
        )
    values = [s / c for s, c in zip(sums, counts)]
    return FitResult(table=GridTable(axes, values), node_counts=counts)


def _nearest_node(axis: Axis, x: float) -> int | None:
    coords = axis.coords
    i = min(range(len(coords)), key=lambda k: abs(coords[k] - x))
    dist = abs(coords[i] - x)
    half_right = (coords[i + 1] - coords[i]) / 2 if i < len(coords) - 1 else None
    half_left = (coords[i] - coords[i - 1]) / 2 if i > 0 else None
    limit = half_right if x >= coords[i] else half_left
    if limit is None:
        # boundary node, outer side: mirror the inner half-cell
        limit = half_left if half_left is not None else half_right
    if limit is None:  # single-node axis accepts everything
        return i
    tol = limit * (1 + 1e-12) + 1e-15
    return i if dist <= tol else None


def _unravel(offset: int, shape: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for size in reversed(shape):
        out.append(offset % size)
        offset //= size
    return tuple(reversed(out))
