"""Surrogate models and the model-exchange file format.

A surrogate is either a grid table or a dense net together with named,
unit-tagged input/output ports and provenance metadata.  Models cross tool
boundaries as JSON files (schema_version 1); the serialization is canonical
so that save -> load -> save is byte-identical and files written by other
tools in the same canonical form survive a round trip unchanged.

Canonical form: compact separators, fixed key order, floats rendered as the
shortest decimal that round-trips IEEE-754 double (Python's repr), all
numbers inside metadata coerced to float, metadata object keys sorted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .core import Component, PortSpec
from .errors import ModelFormatError
from .nets import ACTIVATIONS, DenseNet, Layer
from .tables import Axis, GridTable

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PortTag:
    name: str
    unit: str


@dataclass(frozen=True)
class OutputMetrics:
    name: str
    rmse: float
    max_abs_err: float
    r2: float | None  # None when the holdout targets have zero variance


class SurrogateModel:
    def __init__(self, kind, inputs, outputs, payload, metadata=None):
        if kind not in ("table", "net"):
            raise ValueError(f"unknown surrogate kind {kind!r}")
        inputs = tuple(inputs)
        outputs = tuple(outputs)
        names = [p.name for p in inputs] + [p.name for p in outputs]
        if len(set(names)) != len(names):
            raise ValueError("port names must be unique across inputs and outputs")
        if kind == "table":
            if not isinstance(payload, GridTable):
                raise ValueError("table model payload must be a GridTable")
            if len(outputs) != 1:
                raise ValueError("table models have exactly one output")
            if len(payload.axes) != len(inputs):
                raise ValueError(
                    f"table has {len(payload.axes)} axes but model declares "
                    f"{len(inputs)} inputs"
                )
        else:
            if not isinstance(payload, DenseNet):
                raise ValueError("net model payload must be a DenseNet")
            if payload.n_in != len(inputs) or payload.n_out != len(outputs):
                raise ValueError(
                    f"net is {payload.n_in}->{payload.n_out} but model declares "
                    f"{len(inputs)}->{len(outputs)} ports"
                )
        self.kind = kind
        self.inputs = inputs
        self.outputs = outputs
        self.payload = payload
        self.metadata = dict(metadata) if metadata else {}

    def predict(self, inputs) -> list[float]:
        if self.kind == "table":
            return [self.payload.eval(inputs)]
        return self.payload.eval(inputs)


def table_model(table: GridTable, output: PortTag, metadata=None) -> SurrogateModel:
    """Wrap a GridTable as a model, deriving input tags from the axes."""
    inputs = [PortTag(a.name, a.unit) for a in table.axes]
    return SurrogateModel("table", inputs, [output], table, metadata)


# --- validation metrics ---------------------------------------------------


def validate(model: SurrogateModel, holdout) -> list[OutputMetrics]:
    """Per-output rmse / max abs error / r^2 on (inputs, outputs) pairs."""
    holdout = list(holdout)
    if not holdout:
        raise ValueError("holdout set is empty")
    n_out = len(model.outputs)
    preds = []
    for ins, outs in holdout:
        if len(outs) != n_out:
            raise ValueError(
                f"holdout row has {len(outs)} outputs, model has {n_out}"
            )
        preds.append(model.predict(ins))
    metrics = []
    n = len(holdout)
    for j, tag in enumerate(model.outputs):
        targets = [outs[j] for _, outs in holdout]
        errs = [p[j] - t for p, t in zip(preds, targets)]
        sse = sum(e * e for e in errs)
        rmse = math.sqrt(sse / n)
        max_abs = max(abs(e) for e in errs)
        mean = sum(targets) / n
        sst = sum((t - mean) ** 2 for t in targets)
        r2 = 1.0 - sse / sst if sst > 0.0 else None
        metrics.append(OutputMetrics(tag.name, rmse, max_abs, r2))
    return metrics


def metrics_metadata(metrics: list[OutputMetrics]) -> dict:
    """Validation block in the shape the model file's metadata carries."""
    return {
        "rmse": [m.rmse for m in metrics],
        "max_abs_err": [m.max_abs_err for m in metrics],
        "r2": [m.r2 for m in metrics],
    }


# --- engine binding -------------------------------------------------------


class _SurrogateComponent(Component):
    """Stateless component evaluating a surrogate each step."""

    def __init__(self, component_id, model, feedthrough=None):
        ports = [PortSpec(p.name, "in", p.unit) for p in model.inputs]
        ports += [PortSpec(p.name, "out", p.unit) for p in model.outputs]
        super().__init__(component_id, ports)
        self.model = model
        self._feedthrough = feedthrough

    def feedthrough(self):
        if self._feedthrough is not None:
            return dict(self._feedthrough)
        return super().feedthrough()

    def initial_outputs(self, state):
        zeros = [0.0] * len(self.model.inputs)
        vals = self.model.predict(zeros)
        return {p.name: v for p, v in zip(self.model.outputs, vals)}

    def step(self, inputs, state, dt):
        vals = self.model.predict([inputs[p.name] for p in self.model.inputs])
        return {p.name: v for p, v in zip(self.model.outputs, vals)}, state


def check_ports(model, inputs, outputs) -> None:
    """Require the model's ports to equal (name, unit) sequences, in order.

    Order matters because a table model's axes and a net's input layer are
    positional; callers binding a model as an algebraic core pass inputs
    by position.
    """
    want_in = [tuple(p) for p in inputs]
    want_out = [tuple(p) for p in outputs]
    have_in = [(p.name, p.unit) for p in model.inputs]
    have_out = [(p.name, p.unit) for p in model.outputs]
    if have_in != want_in or have_out != want_out:
        def fmt(pairs):
            return ", ".join(f"{n} [{u}]" for n, u in pairs)
        raise ModelFormatError(
            f"model ports do not match: expected inputs ({fmt(want_in)}) "
            f"-> outputs ({fmt(want_out)}), got inputs ({fmt(have_in)}) "
            f"-> outputs ({fmt(have_out)})"
        )


def wrap_component(model, component_id, feedthrough=None, expect=None) -> Component:
    """Bind a surrogate as a stateless component.

    When `expect` (a Component or list of PortSpec) is given, the model's
    ports must cover it one-to-one; mismatches report the offending names
    with their quantity tags.
    """
    if expect is not None:
        specs = expect.ports if isinstance(expect, Component) else list(expect)
        want_in = {p.name: p.quantity for p in specs if p.direction == "in"}
        want_out = {p.name: p.quantity for p in specs if p.direction == "out"}
        have_in = {p.name: p.unit for p in model.inputs}
        have_out = {p.name: p.unit for p in model.outputs}
        problems = []
        for label, want, have in (
            ("input", want_in, have_in),
            ("output", want_out, have_out),
        ):
            for name in sorted(set(want) - set(have)):
                problems.append(f"missing {label} {name} [{want[name]}]")
            for name in sorted(set(have) - set(want)):
                problems.append(f"unexpected {label} {name} [{have[name]}]")
            for name in sorted(set(want) & set(have)):
                if want[name] != have[name]:
                    problems.append(
                        f"{label} {name} is [{have[name]}], expected [{want[name]}]"
                    )
        if problems:
            raise ModelFormatError(
                "surrogate does not match the component it replaces: "
                + "; ".join(problems)
            )
    return _SurrogateComponent(component_id, model, feedthrough)


# --- model-exchange files -------------------------------------------------


def _canon_meta(value, where="metadata"):
    if isinstance(value, bool):
        return value
    if isinstance(value, dict):
        return {str(k): _canon_meta(value[k], f"{where}.{k}") for k in sorted(value)}
    if isinstance(value, (list, tuple)):
        return [_canon_meta(v, where) for v in value]
    if isinstance(value, (int, float)):
        v = float(value)
        if not math.isfinite(v):
            raise ModelFormatError(f"{where}: non-finite number")
        return v
    if value is None or isinstance(value, str):
        return value
    raise ModelFormatError(f"{where}: unsupported value type {type(value).__name__}")


def dumps_model(model: SurrogateModel) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": model.kind,
        "inputs": [{"name": p.name, "unit": p.unit} for p in model.inputs],
        "outputs": [{"name": p.name, "unit": p.unit} for p in model.outputs],
    }
    if model.kind == "table":
        table = model.payload
        doc["table"] = {
            "axes": [
                {"name": a.name, "unit": a.unit, "coords": list(a.coords)}
                for a in table.axes
            ],
            "values": list(table.values),
        }
    else:
        net = model.payload
        doc["net"] = {
            "norm_in": [{"mean": m, "scale": s} for m, s in net.norm_in],
            "norm_out": [{"mean": m, "scale": s} for m, s in net.norm_out],
            "layers": [
                {
                    "weights": [list(row) for row in layer.weights],
                    "bias": list(layer.bias),
                    "activation": layer.activation,
                }
                for layer in net.layers
            ],
        }
    doc["metadata"] = _canon_meta(model.metadata)
    return json.dumps(doc, separators=(",", ":")) + "\n"


def save_model(model: SurrogateModel, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(dumps_model(model))


def _require(cond, where, msg):
    if not cond:
        raise ModelFormatError(f"{where}: {msg}")


def _floats(seq, where):
    out = []
    for k, v in enumerate(seq):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ModelFormatError(f"{where}[{k}]: expected a number")
        out.append(float(v))
    return out


def _port_tags(entries, where):
    _require(isinstance(entries, list) and entries, where, "expected a non-empty list")
    tags = []
    for k, e in enumerate(entries):
        _require(isinstance(e, dict), f"{where}[{k}]", "expected an object")
        _require(isinstance(e.get("name"), str), f"{where}[{k}]", "missing name")
        _require(isinstance(e.get("unit"), str), f"{where}[{k}]", "missing unit")
        tags.append(PortTag(e["name"], e["unit"]))
    return tags


def loads_model(text: str, where: str = "model") -> SurrogateModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{where}: not valid JSON ({exc})") from None
    _require(isinstance(doc, dict), where, "top level must be an object")
    version = doc.get("schema_version")
    _require(
        version == SCHEMA_VERSION,
        where,
        f"unsupported schema_version {version!r} (this tool reads {SCHEMA_VERSION})",
    )
    kind = doc.get("kind")
    _require(kind in ("table", "net"), where, f"unknown kind {kind!r}")
    inputs = _port_tags(doc.get("inputs"), f"{where}.inputs")
    outputs = _port_tags(doc.get("outputs"), f"{where}.outputs")
    _require("metadata" in doc and isinstance(doc["metadata"], dict),
             where, "missing metadata object")

    if kind == "table":
        spec = doc.get("table")
        _require(isinstance(spec, dict), where, "kind is table but table block missing")
        raw_axes = spec.get("axes")
        _require(isinstance(raw_axes, list) and raw_axes,
                 f"{where}.table.axes", "expected a non-empty list")
        axes = []
        for k, a in enumerate(raw_axes):
            loc = f"{where}.table.axes[{k}]"
            _require(isinstance(a, dict), loc, "expected an object")
            _require(isinstance(a.get("name"), str), loc, "missing name")
            _require(isinstance(a.get("unit"), str), loc, "missing unit")
            coords = _floats(a.get("coords", []), f"{loc}.coords")
            try:
                axes.append(Axis(a["name"], a["unit"], coords))
            except ValueError as exc:
                raise ModelFormatError(f"{loc}: {exc}") from None
        values = _floats(spec.get("values", []), f"{where}.table.values")
        try:
            payload = GridTable(axes, values)
        except ValueError as exc:
            raise ModelFormatError(f"{where}.table: {exc}") from None
    else:
        spec = doc.get("net")
        _require(isinstance(spec, dict), where, "kind is net but net block missing")

        def norm_pairs(key):
            raw = spec.get(key)
            _require(isinstance(raw, list) and raw,
                     f"{where}.net.{key}", "expected a non-empty list")
            pairs = []
            for k, e in enumerate(raw):
                loc = f"{where}.net.{key}[{k}]"
                _require(isinstance(e, dict) and "mean" in e and "scale" in e,
                         loc, "expected an object with mean and scale")
                mean, scale = _floats([e["mean"], e["scale"]], loc)
                pairs.append((mean, scale))
            return pairs

        norm_in = norm_pairs("norm_in")
        norm_out = norm_pairs("norm_out")
        raw_layers = spec.get("layers")
        _require(isinstance(raw_layers, list) and raw_layers,
                 f"{where}.net.layers", "expected a non-empty list")
        layers = []
        for k, lay in enumerate(raw_layers):
            loc = f"{where}.net.layers[{k}]"
            _require(isinstance(lay, dict), loc, "expected an object")
            act = lay.get("activation")
            _require(act in ACTIVATIONS, loc, f"unknown activation {act!r}")
            raw_w = lay.get("weights")
            _require(isinstance(raw_w, list) and raw_w,
                     f"{loc}.weights", "expected a non-empty list of rows")
            weights = tuple(
                tuple(_floats(row, f"{loc}.weights[{r}]"))
                for r, row in enumerate(raw_w)
            )
            bias = tuple(_floats(lay.get("bias", []), f"{loc}.bias"))
            try:
                layers.append(Layer(weights, bias, act))
            except ValueError as exc:
                raise ModelFormatError(f"{loc}: {exc}") from None
        try:
            payload = DenseNet(layers, norm_in, norm_out)
        except ValueError as exc:
            raise ModelFormatError(f"{where}.net: {exc}") from None

    try:
        return SurrogateModel(kind, inputs, outputs, payload, doc["metadata"])
    except ValueError as exc:
        raise ModelFormatError(f"{where}: {exc}") from None


def load_model(path) -> SurrogateModel:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from None
    return loads_model(text, where=str(path))
