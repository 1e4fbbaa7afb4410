"""Dense feedforward network evaluation.

Networks are evaluated, never trained, on this side of the model-exchange
boundary: training happens offline and models arrive as files.  A network
is a chain of affine layers with tanh / relu / identity activations plus
per-input standardization and per-output destandardization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

ACTIVATIONS = ("tanh", "relu", "identity")


@dataclass(frozen=True)
class Layer:
    weights: tuple[tuple[float, ...], ...]  # rows = outputs
    bias: tuple[float, ...]
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if len(self.weights) != len(self.bias):
            raise ValueError(
                f"layer has {len(self.weights)} weight rows but "
                f"{len(self.bias)} bias entries"
            )
        widths = {len(row) for row in self.weights}
        if len(widths) > 1:
            raise ValueError("ragged weight matrix")

    @property
    def n_out(self) -> int:
        return len(self.bias)

    @property
    def n_in(self) -> int:
        return len(self.weights[0]) if self.weights else 0


class DenseNet:
    """Layer chain with input/output normalization, validated on construction."""

    def __init__(
        self,
        layers: list[Layer],
        norm_in: list[tuple[float, float]],
        norm_out: list[tuple[float, float]],
    ):
        if not layers:
            raise ValueError("network needs at least one layer")
        if layers[0].n_in != len(norm_in):
            raise ValueError(
                f"first layer expects {layers[0].n_in} inputs, "
                f"normalization covers {len(norm_in)}"
            )
        for k, (a, b) in enumerate(zip(layers, layers[1:])):
            if b.n_in != a.n_out:
                raise ValueError(
                    f"layer {k} produces {a.n_out} values but layer {k + 1} "
                    f"expects {b.n_in}"
                )
        if layers[-1].n_out != len(norm_out):
            raise ValueError(
                f"last layer produces {layers[-1].n_out} values, "
                f"denormalization covers {len(norm_out)}"
            )
        if layers[-1].activation != "identity":
            raise ValueError("last layer activation must be identity")
        for mean, scale in list(norm_in) + list(norm_out):
            if not scale > 0:
                raise ValueError(f"normalization scale must be positive, got {scale}")
        self.layers = tuple(layers)
        self.norm_in = tuple((float(m), float(s)) for m, s in norm_in)
        self.norm_out = tuple((float(m), float(s)) for m, s in norm_out)

    @property
    def n_in(self) -> int:
        return len(self.norm_in)

    @property
    def n_out(self) -> int:
        return len(self.norm_out)

    def eval(self, inputs) -> list[float]:
        if len(inputs) != len(self.norm_in):
            raise ValueError(
                f"expected {len(self.norm_in)} inputs, got {len(inputs)}"
            )
        x = [(v - m) / s for v, (m, s) in zip(inputs, self.norm_in)]
        for layer in self.layers:
            act = layer.activation
            y = []
            for row, b in zip(layer.weights, layer.bias):
                total = b
                for w, xi in zip(row, x):
                    total += w * xi
                if act == "tanh":
                    total = math.tanh(total)
                elif act == "relu":
                    total = total if total > 0.0 else 0.0
                y.append(total)
            x = y
        return [m + s * v for v, (m, s) in zip(x, self.norm_out)]

    def __call__(self, *inputs: float) -> list[float]:
        return self.eval(inputs)
