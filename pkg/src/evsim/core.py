"""Fixed-step scheduler for coupled component models.

Components exchange named scalar signals over a bus once per time step.
Execution order is a topological sort of the connection graph; cycles must
be broken by explicitly declared feedback edges, which carry a one-step
delay initialized from each component's declared initial outputs.  Within a
step every component reads current-tick values from upstream components and
previous-tick values across feedback edges, which makes the result
independent of how ties in the topological order are broken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from .errors import GraphError, StepError

# Physical-quantity tags a port may carry.  Connections are only legal
# between ports with identical tags.
QUANTITIES = frozenset({"V", "A", "N*m", "rad/s", "K", "W", "1", "Hz", "m/s"})


@dataclass(frozen=True)
class PortSpec:
    """A named, direction- and quantity-tagged signal endpoint."""

    name: str
    direction: str  # "in" | "out"
    quantity: str

    def __post_init__(self):
        if self.direction not in ("in", "out"):
            raise ValueError(f"port {self.name}: direction must be 'in' or 'out'")
        if self.quantity not in QUANTITIES:
            raise ValueError(
                f"port {self.name}: unknown quantity tag {self.quantity!r}"
            )


class Component:
    """Uniform step contract for plants, controllers and surrogates.

    Subclasses declare ports, provide initial outputs for the t=0 bus and
    implement ``step``.  A step must be deterministic and free of side
    effects: state goes in, a new state comes out.  Parameters held on the
    instance are treated as immutable after construction, so one component
    instance may be shared by concurrently running simulations as long as
    each run keeps its own state object.
    """

    def __init__(self, component_id: str, ports: tuple[PortSpec, ...]):
        names = [p.name for p in ports]
        if len(set(names)) != len(names):
            raise GraphError(f"component {component_id}: duplicate port names")
        self.id = component_id
        self.ports = ports
        self.inputs = tuple(p for p in ports if p.direction == "in")
        self.outputs = tuple(p for p in ports if p.direction == "out")

    def feedthrough(self) -> frozenset[tuple[str, str]]:
        """(input, output) pairs where the output depends on the same-tick input.

        Defaults to full feedthrough.  The scheduler orders every
        non-feedback connection source-before-destination regardless, so
        this is descriptive metadata; delays are never inferred from it.
        """
        return frozenset(
            (i.name, o.name) for i in self.inputs for o in self.outputs
        )

    def initial_state(self) -> Any:
        return None

    def initial_outputs(self, state: Any) -> dict[str, float]:
        raise NotImplementedError

    def step(
        self, inputs: Mapping[str, float], state: Any, dt: float
    ) -> tuple[dict[str, float], Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Connection:
    """Directed signal wire ``src_component.src_port -> dst_component.dst_port``.

    ``feedback=True`` marks an explicitly declared one-step delay.
    """

    src_component: str
    src_port: str
    dst_component: str
    dst_port: str
    feedback: bool = False

    @property
    def src_key(self) -> str:
        return f"{self.src_component}.{self.src_port}"

    @property
    def dst_key(self) -> str:
        return f"{self.dst_component}.{self.dst_port}"


@dataclass
class Schedule:
    """Validated execution plan: component order, wiring and step size."""

    order: list[Component]
    connections: list[Connection]
    feedback_edges: list[Connection]
    dt: float
    # per component, in schedule order: [(input_name, src_key, is_feedback)]
    wiring: list[list[tuple[str, str, bool]]] = field(default_factory=list)
    columns: list[str] = field(default_factory=list)

    def component(self, component_id: str) -> Component:
        for c in self.order:
            if c.id == component_id:
                return c
        raise KeyError(component_id)


@dataclass
class SignalBus:
    """All port values at one instant, keyed by ``component.port``."""

    values: dict[str, float]
    time: float = 0.0


class Trace:
    """Time-indexed record of every output signal.

    Row 0 holds the initial conditions at t=0; every later row is the bus
    after one step.
    """

    def __init__(self, columns: list[str]):
        self.columns = list(columns)
        self._index = {name: i for i, name in enumerate(self.columns)}
        self.times: list[float] = []
        self.rows: list[list[float]] = []

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, time: float, row: list[float]) -> None:
        self.times.append(time)
        self.rows.append(row)

    def column(self, name: str) -> list[float]:
        i = self._index[name]
        return [row[i] for row in self.rows]

    def value(self, step: int, name: str) -> float:
        return self.rows[step][self._index[name]]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(["time_s"] + self.columns) + "\n")
            for t, row in zip(self.times, self.rows):
                fh.write(repr(t) + "," + ",".join(repr(v) for v in row) + "\n")


def validate_graph(
    components: list[Component],
    connections: list[Connection],
    dt: float,
) -> Schedule:
    """Check the component graph and compute a deterministic schedule.

    Raises GraphError for: unknown components or ports, quantity-tag
    mismatches, inputs connected zero or multiple times, and dependency
    cycles that contain no declared feedback edge (algebraic loops).
    Tie-breaking in the topological sort follows registration order, which
    together with the one-step delay on feedback edges makes the computed
    trace independent of tie order.
    """
    if not components:
        raise GraphError("component graph is empty")
    if dt <= 0:
        raise GraphError(f"dt must be positive, got {dt}")
    by_id: dict[str, Component] = {}
    for comp in components:
        if comp.id in by_id:
            raise GraphError(f"duplicate component id {comp.id!r}")
        by_id[comp.id] = comp

    port_of: dict[str, PortSpec] = {}
    for comp in components:
        for port in comp.ports:
            port_of[f"{comp.id}.{port.name}"] = port

    seen_dst: dict[str, Connection] = {}
    for conn in connections:
        for cid in (conn.src_component, conn.dst_component):
            if cid not in by_id:
                raise GraphError(f"connection references unknown component {cid!r}")
        src = port_of.get(conn.src_key)
        dst = port_of.get(conn.dst_key)
        if src is None or src.direction != "out":
            raise GraphError(f"{conn.src_key} is not a declared output port")
        if dst is None or dst.direction != "in":
            raise GraphError(f"{conn.dst_key} is not a declared input port")
        if src.quantity != dst.quantity:
            raise GraphError(
                f"quantity mismatch on {conn.src_key} -> {conn.dst_key}: "
                f"{src.quantity!r} vs {dst.quantity!r}"
            )
        if conn.src_component == conn.dst_component and not conn.feedback:
            raise GraphError(
                f"algebraic loop: self-connection {conn.src_key} -> "
                f"{conn.dst_key} must be declared as a feedback edge"
            )
        if conn.dst_key in seen_dst:
            raise GraphError(f"input {conn.dst_key} connected more than once")
        seen_dst[conn.dst_key] = conn

    for comp in components:
        for port in comp.inputs:
            key = f"{comp.id}.{port.name}"
            if key not in seen_dst:
                raise GraphError(f"unconnected input {key}")

    order = _topological_order(components, connections)

    schedule = Schedule(
        order=order,
        connections=list(connections),
        feedback_edges=[c for c in connections if c.feedback],
        dt=dt,
    )
    incoming: dict[str, list[Connection]] = {c.id: [] for c in components}
    for conn in connections:
        incoming[conn.dst_component].append(conn)
    for comp in order:
        conns = {c.dst_port: c for c in incoming[comp.id]}
        schedule.wiring.append(
            [(p.name, conns[p.name].src_key, conns[p.name].feedback) for p in comp.inputs]
        )
    schedule.columns = [
        f"{comp.id}.{port.name}" for comp in order for port in comp.outputs
    ]
    return schedule


def _topological_order(
    components: list[Component], connections: list[Connection]
) -> list[Component]:
    """Kahn's algorithm over non-feedback edges, registration order on ties."""
    index = {comp.id: i for i, comp in enumerate(components)}
    succ: dict[str, set[str]] = {comp.id: set() for comp in components}
    indeg = {comp.id: 0 for comp in components}
    for conn in connections:
        if conn.feedback or conn.src_component == conn.dst_component:
            continue
        if conn.dst_component not in succ[conn.src_component]:
            succ[conn.src_component].add(conn.dst_component)
            indeg[conn.dst_component] += 1

    ready = sorted((cid for cid, d in indeg.items() if d == 0), key=index.get)
    order: list[str] = []
    while ready:
        cid = ready.pop(0)
        order.append(cid)
        changed = False
        for nxt in succ[cid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
                changed = True
        if changed:
            ready.sort(key=index.get)
    if len(order) != len(components):
        stuck = [cid for cid, d in indeg.items() if d > 0]
        cycle = _find_cycle(stuck, succ)
        raise GraphError(
            "algebraic loop: dependency cycle without a declared feedback edge: "
            + " -> ".join(cycle)
        )
    by_id = {comp.id: comp for comp in components}
    return [by_id[cid] for cid in order]


def _find_cycle(stuck: list[str], succ: dict[str, set[str]]) -> list[str]:
    """Walk successors among the unresolved components until a repeat."""
    remaining = set(stuck)
    node = stuck[0]
    path, seen = [], {}
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = next(iter(sorted(s for s in succ[node] if s in remaining)))
    return path[seen[node]:] + [node]


def initial_bus(schedule: Schedule, states: dict[str, Any]) -> SignalBus:
    """Bus at t=0, populated from every component's declared initial outputs."""
    values: dict[str, float] = {}
    for comp in schedule.order:
        outs = comp.initial_outputs(states[comp.id])
        for port in comp.outputs:
            if port.name not in outs:
                raise StepError(
                    f"component {comp.id} missing initial output {port.name!r}",
                    component_id=comp.id,
                    port=port.name,
                )
            values[f"{comp.id}.{port.name}"] = float(outs[port.name])
    return SignalBus(values=values, time=0.0)


def initial_states(schedule: Schedule) -> dict[str, Any]:
    return {comp.id: comp.initial_state() for comp in schedule.order}


def step_system(
    schedule: Schedule,
    bus: SignalBus,
    states: dict[str, Any],
    dt: float,
) -> tuple[SignalBus, dict[str, Any]]:
    """Advance every component once in schedule order.

    Inputs come from the in-progress bus for upstream components already
    stepped this tick, and from the previous tick's bus across feedback
    edges.  Returns a new bus and state map; the arguments are not mutated.
    """
    if dt <= 0:
        raise StepError(f"dt must be positive, got {dt}")
    prev = bus.values
    cur = dict(prev)
    new_states = dict(states)
    _advance(schedule, prev, cur, new_states, dt, bus.time + dt)
    return SignalBus(values=cur, time=bus.time + dt), new_states


def _advance(
    schedule: Schedule,
    prev: dict[str, float],
    cur: dict[str, float],
    states: dict[str, Any],
    dt: float,
    time: float,
) -> None:
    """One tick, in place: read from prev/cur, write outputs into cur."""
    isfinite = math.isfinite
    for comp, wiring in zip(schedule.order, schedule.wiring):
        ins = {
            name: (prev[src] if fb else cur[src]) for name, src, fb in wiring
        }
        outs, states[comp.id] = comp.step(ins, states[comp.id], dt)
        cid = comp.id
        for port in comp.outputs:
            try:
                v = outs[port.name]
            except KeyError:
                raise StepError(
                    f"component {cid} did not produce output {port.name!r}",
                    component_id=cid, port=port.name, time_s=time,
                ) from None
            if not isfinite(v):
                raise StepError(
                    f"component {cid} produced non-finite value {v!r} "
                    f"on port {port.name!r} at t={time:.6g} s",
                    component_id=cid, port=port.name, time_s=time,
                )
            cur[f"{cid}.{port.name}"] = v


def run(
    schedule: Schedule,
    states0: dict[str, Any] | None = None,
    duration: float = 0.0,
    recorder: Callable[[SignalBus], None] | None = None,
) -> Trace:
    """Run for ``duration`` seconds and return the recorded trace.

    ``duration`` must be an integral multiple of the schedule's dt (1e-9
    relative tolerance).  Exactly round(duration/dt) steps are executed
    after the initial-condition row; the recorder, when given, sees the
    bus after every step.  Time stamps are computed as step_index * dt,
    never by accumulation.
    """
    dt = schedule.dt
    if duration < 0:
        raise ValueError(f"duration must be non-negative, got {duration}")
    n_float = duration / dt
    n = round(n_float)
    if abs(n_float - n) > 1e-9 * max(1.0, abs(n_float)):
        raise ValueError(
            f"duration {duration} is not an integral multiple of dt {dt}"
        )

    states = initial_states(schedule) if states0 is None else dict(states0)
    bus = initial_bus(schedule, states)
    prev = dict(bus.values)
    cur = dict(bus.values)
    trace = Trace(schedule.columns)
    columns = schedule.columns
    trace.append(0.0, [bus.values[name] for name in columns])
    try:
        for k in range(n):
            prev, cur = cur, prev
            cur.update(prev)
            time = (k + 1) * dt
            _advance(schedule, prev, cur, states, dt, time)
            trace.append(time, [cur[name] for name in columns])
            if recorder is not None:
                recorder(SignalBus(values=cur, time=time))
    except StepError as err:
        if err.time_s is None:
            err.time_s = len(trace.rows) * dt
        raise
    return trace
