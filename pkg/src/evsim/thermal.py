"""Lumped-parameter thermal network.

Explicit-Euler RC network over named component nodes, with ambient and
the coolant loop as fixed-temperature boundaries.  The explicit scheme is
only stable for dt < min(C_i / sum_j G_ij); that is checked when a
scenario is assembled, not every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Component, PortSpec
from .errors import ConfigError, ModelFormatError

BOUNDARIES = ("ambient", "coolant")


@dataclass(frozen=True)
class ThermalNode:
    id: str
    heat_capacity: float  # J/K
    initial_k: float

    def __post_init__(self):
        if not self.heat_capacity > 0:
            raise ValueError(f"node {self.id}: heat capacity must be positive")
        if self.id in BOUNDARIES:
            raise ValueError(f"node id {self.id!r} is reserved for a boundary")


@dataclass(frozen=True)
class ThermalEdge:
    a: str
    b: str  # node id, "ambient", or "coolant"
    conductance: float  # W/K

    def __post_init__(self):
        if self.conductance < 0:
            raise ValueError(f"edge {self.a}-{self.b}: conductance must be >= 0")


class ThermalNetwork:
    def __init__(self, nodes, edges, ambient_k=298.15, coolant_k=298.15):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self.ambient_k = float(ambient_k)
        self.coolant_k = float(coolant_k)
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate thermal node ids")
        if not ids:
            raise ValueError("thermal network needs at least one node")
        self.index = {nid: k for k, nid in enumerate(ids)}
        boundary_temp = {"ambient": self.ambient_k, "coolant": self.coolant_k}

        # per node: internal neighbours [(index, G)], constant boundary
        # injection sum(G_b * T_b), and total incident conductance
        n = len(self.nodes)
        self._neighbours = [[] for _ in range(n)]
        self._boundary_in = [0.0] * n
        self._g_total = [0.0] * n
        for e in self.edges:
            ends = []
            for side in (e.a, e.b):
                if side in boundary_temp:
                    ends.append(side)
                elif side in self.index:
                    ends.append(self.index[side])
                else:
                    raise ValueError(f"edge {e.a}-{e.b}: unknown node {side!r}")
            if all(isinstance(s, str) for s in ends):
                raise ValueError(f"edge {e.a}-{e.b} connects two boundaries")
            for s, other in ((ends[0], ends[1]), (ends[1], ends[0])):
                if isinstance(s, int):
                    self._g_total[s] += e.conductance
                    if isinstance(other, int):
                        self._neighbours[s].append((other, e.conductance))
                    else:
                        self._boundary_in[s] += e.conductance * boundary_temp[other]

    @property
    def node_ids(self):
        return tuple(n.id for n in self.nodes)

    def initial_temps(self):
        return tuple(n.initial_k for n in self.nodes)

    def stability_limit(self) -> float:
        """Largest stable dt; infinite for an unconnected network."""
        limits = [n.heat_capacity / g
                  for n, g in zip(self.nodes, self._g_total) if g > 0]
        return min(limits) if limits else float("inf")

    def check_stability(self, dt: float) -> None:
        limit = self.stability_limit()
        if not dt < limit:
            raise ConfigError(
                f"dt = {dt} s violates the explicit-Euler stability bound "
                f"min(C/sum G) = {limit:.6g} s of the thermal network"
            )

    def steady_state(self, heats) -> tuple[float, ...]:
        """Temperatures with d/dt = 0, by direct linear solve."""
        n = len(self.nodes)
        a = np.zeros((n, n))
        b = np.array([float(q) for q in heats]) + np.array(self._boundary_in)
        for i in range(n):
            a[i, i] = self._g_total[i]
            for j, g in self._neighbours[i]:
                a[i, j] -= g
        try:
            return tuple(float(t) for t in np.linalg.solve(a, b))
        except np.linalg.LinAlgError:
            raise ConfigError(
                "thermal network has no steady state (a node is isolated "
                "from every boundary)"
            ) from None


def step_thermal(net: ThermalNetwork, temps, heats, dt):
    """One explicit-Euler step; temps and heats in node order."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    out = []
    for i, node in enumerate(net.nodes):
        flow = heats[i] + net._boundary_in[i] - net._g_total[i] * temps[i]
        for j, g in net._neighbours[i]:
            flow += g * temps[j]
        out.append(temps[i] + dt * flow / node.heat_capacity)
    return tuple(out)


class ThermalComponent(Component):
    def __init__(self, component_id, net: ThermalNetwork):
        ports = [PortSpec(f"q_{nid}", "in", "W") for nid in net.node_ids]
        ports += [PortSpec(f"t_{nid}", "out", "K") for nid in net.node_ids]
        super().__init__(component_id, ports)
        self.net = net

    def initial_state(self):
        return self.net.initial_temps()

    def initial_outputs(self, state):
        return {f"t_{nid}": t for nid, t in zip(self.net.node_ids, state)}

    def step(self, inputs, state, dt):
        heats = [inputs[f"q_{nid}"] for nid in self.net.node_ids]
        temps = step_thermal(self.net, state, heats, dt)
        return {f"t_{nid}": t for nid, t in zip(self.net.node_ids, temps)}, temps


def wrap_thermal_surrogate(models, net: ThermalNetwork, component_id):
    """Bind steady-state thermal surrogates to the physics port contract.

    `models` is one multi-output model or a list of single-output ones;
    together they must produce t_<node> for every node.  Model inputs may
    be any of the q_<node> heats plus the optional boundary temperatures
    t_ambient / t_coolant, which are bound to the network's constants.
    """
    if not isinstance(models, (list, tuple)):
        models = [models]
    heat_names = {f"q_{nid}" for nid in net.node_ids}
    bound = {"t_ambient": net.ambient_k, "t_coolant": net.coolant_k}
    wanted = [f"t_{nid}" for nid in net.node_ids]
    produced = []
    for model in models:
        for tag in model.inputs:
            if tag.name not in heat_names and tag.name not in bound:
                raise ModelFormatError(
                    f"thermal surrogate input {tag.name!r} matches no node "
                    f"heat or boundary (nodes: {', '.join(sorted(heat_names))})"
                )
        produced.extend(tag.name for tag in model.outputs)
    missing = [n for n in wanted if n not in produced]
    extra = [n for n in produced if n not in wanted]
    if missing or extra or len(produced) != len(set(produced)):
        raise ModelFormatError(
            "thermal surrogate outputs do not cover the network nodes: "
            f"missing {missing or 'none'}, unexpected {extra or 'none'}"
        )

    class _ThermalSurrogate(Component):
        def __init__(self):
            ports = [PortSpec(f"q_{nid}", "in", "W") for nid in net.node_ids]
            ports += [PortSpec(f"t_{nid}", "out", "K") for nid in net.node_ids]
            super().__init__(component_id, ports)

        def _eval(self, inputs):
            out = {}
            for model in models:
                point = [
                    bound[t.name] if t.name in bound else inputs[t.name]
                    for t in model.inputs
                ]
                for tag, v in zip(model.outputs, model.predict(point)):
                    out[tag.name] = v
            return out

        def initial_outputs(self, state):
            return self._eval({name: 0.0 for name in heat_names})

        def step(self, inputs, state, dt):
            return self._eval(inputs), state

    return _ThermalSurrogate()
