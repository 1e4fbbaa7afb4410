"""Thermal network: Euler stepping, stability bound, steady state."""

import itertools
import math

import pytest

from evsim.errors import ConfigError, ModelFormatError
from evsim.surrogate import PortTag, table_model
from evsim.tables import Axis, GridTable
from evsim.thermal import (ThermalComponent, ThermalEdge, ThermalNetwork,
                           ThermalNode, step_thermal, wrap_thermal_surrogate)

from oracles import euler_rc, exp_decay


def single_node(capacity=500.0, conductance=25.0, start=350.0, ambient=298.15):
    return ThermalNetwork(
        [ThermalNode("battery", capacity, start)],
        [ThermalEdge("battery", "ambient", conductance)],
        ambient_k=ambient,
    )


def three_node():
    nodes = [
        ThermalNode("battery", 300000.0, 298.15),
        ThermalNode("inverter", 9000.0, 298.15),
        ThermalNode("motor", 30000.0, 298.15),
    ]
    edges = [
        ThermalEdge("battery", "coolant", 25.0),
        ThermalEdge("inverter", "coolant", 30.0),
        ThermalEdge("motor", "coolant", 40.0),
        ThermalEdge("battery", "ambient", 8.0),
        ThermalEdge("motor", "ambient", 5.0),
        ThermalEdge("inverter", "motor", 2.0),
    ]
    return ThermalNetwork(nodes, edges)


def test_node_and_edge_validation():
    with pytest.raises(ValueError, match="heat capacity"):
        ThermalNode("battery", 0.0, 298.15)
    with pytest.raises(ValueError, match="reserved"):
        ThermalNode("ambient", 100.0, 298.15)
    with pytest.raises(ValueError, match="conductance"):
        ThermalEdge("a", "b", -1.0)


def test_network_validation():
    node = ThermalNode("battery", 100.0, 298.15)
    with pytest.raises(ValueError, match="duplicate"):
        ThermalNetwork([node, node], [])
    with pytest.raises(ValueError, match="at least one node"):
        ThermalNetwork([], [])
    with pytest.raises(ValueError, match="unknown node"):
        ThermalNetwork([node], [ThermalEdge("battery", "chassis", 1.0)])
    with pytest.raises(ValueError, match="two boundaries"):
        ThermalNetwork([node], [ThermalEdge("ambient", "coolant", 1.0)])


def test_stability_limit_and_check():
    net = single_node(capacity=500.0, conductance=25.0)
    assert net.stability_limit() == pytest.approx(20.0)
    net.check_stability(0.01)
    with pytest.raises(ConfigError, match="stability"):
        net.check_stability(20.0)
    # an unconnected node never diverges, only stays put
    floating = ThermalNetwork([ThermalNode("battery", 1.0, 300.0)], [])
    assert floating.stability_limit() == math.inf
    floating.check_stability(1e9)


def test_single_node_decay_matches_analytic_solution():
    cap, g, start, ambient = 500.0, 25.0, 350.0, 298.15
    tau = cap / g  # 20 s
    net = single_node(cap, g, start, ambient)
    dt = 0.01
    temps = net.initial_temps()
    steps = int(round(5 * tau / dt))
    for _ in range(steps):
        temps = step_thermal(net, temps, (0.0,), dt)
    expected = exp_decay(5 * tau, start, ambient, tau)
    assert temps[0] == pytest.approx(expected, rel=1e-3)


def test_step_matches_discrete_euler_recurrence_exactly():
    cap, g, start, ambient = 500.0, 25.0, 350.0, 298.15
    net = single_node(cap, g, start, ambient)
    dt = 0.05
    ref = euler_rc(start, ambient, g / cap, dt, 400)
    temps = (start,)
    for k in range(400):
        temps = step_thermal(net, temps, (0.0,), dt)
        assert temps[0] == pytest.approx(ref[k + 1], rel=1e-12)


def test_steady_state_offset_is_heat_over_conductance():
    net = single_node(capacity=500.0, conductance=25.0, ambient=298.15)
    (t_ss,) = net.steady_state((100.0,))
    assert t_ss == pytest.approx(298.15 + 100.0 / 25.0, abs=1e-9)


def test_steady_state_matches_long_simulation():
    net = three_node()
    heats = (120.0, 300.0, 450.0)
    target = net.steady_state(heats)
    temps = net.initial_temps()
    dt = 0.5 * net.stability_limit()
    # march far past the slowest time constant
    for _ in range(400000):
        temps = step_thermal(net, temps, heats, dt)
    for t, t_ref in zip(temps, target):
        assert t == pytest.approx(t_ref, abs=1e-6)


def test_steady_state_needs_a_boundary_path():
    net = ThermalNetwork(
        [ThermalNode("a", 10.0, 300.0), ThermalNode("b", 10.0, 300.0)],
        [ThermalEdge("a", "b", 5.0)],
    )
    with pytest.raises(ConfigError, match="no steady state"):
        net.steady_state((1.0, 1.0))


def test_component_ports_and_step():
    net = three_node()
    comp = ThermalComponent("thermal", net)
    assert [p.name for p in comp.ports if p.direction == "in"] == [
        "q_battery", "q_inverter", "q_motor"]
    assert [(p.name, p.quantity) for p in comp.ports if p.direction == "out"] == [
        ("t_battery", "K"), ("t_inverter", "K"), ("t_motor", "K")]
    state = comp.initial_state()
    assert comp.initial_outputs(state) == {
        "t_battery": 298.15, "t_inverter": 298.15, "t_motor": 298.15}
    heats = {"q_battery": 50.0, "q_inverter": 200.0, "q_motor": 400.0}
    outs, new_state = comp.step(heats, state, 0.01)
    ref = step_thermal(net, state, (50.0, 200.0, 400.0), 0.01)
    assert new_state == ref
    assert outs == {f"t_{n}": t for n, t in zip(net.node_ids, ref)}


def steady_tables(net, q_hi=1000.0):
    """Fit one table per node to the steady-state map on a corner grid.

    The steady-state solution is affine in the heats, so multilinear
    interpolation over any box reproduces it exactly.
    """
    axes = [Axis(f"q_{nid}", "W", [0.0, q_hi]) for nid in net.node_ids]
    corners = list(itertools.product(*[a.coords for a in axes]))
    solved = [net.steady_state(c) for c in corners]
    models = []
    for k, nid in enumerate(net.node_ids):
        table = GridTable(axes, [s[k] for s in solved])
        models.append(table_model(table, PortTag(f"t_{nid}", "K")))
    return models


def test_thermal_surrogate_matches_direct_solve():
    net = three_node()
    comp = wrap_thermal_surrogate(steady_tables(net), net, "thermal")
    heats = {"q_battery": 123.0, "q_inverter": 456.0, "q_motor": 789.0}
    outs, _ = comp.step(heats, comp.initial_state(), 0.01)
    ref = net.steady_state((123.0, 456.0, 789.0))
    for t, t_ref in zip((outs["t_battery"], outs["t_inverter"],
                         outs["t_motor"]), ref):
        assert t == pytest.approx(t_ref, rel=1e-12)
    # quiescent outputs come from the zero-heat point
    assert comp.initial_outputs(comp.initial_state())["t_inverter"] == \
        pytest.approx(net.steady_state((0.0, 0.0, 0.0))[1], rel=1e-12)


def test_thermal_surrogate_port_checks():
    net = three_node()
    good = steady_tables(net)
    with pytest.raises(ModelFormatError, match="matches no node"):
        bad = table_model(GridTable([Axis("q_chassis", "W", [0.0, 1.0])],
                                    [0.0, 1.0]), PortTag("t_battery", "K"))
        wrap_thermal_surrogate([bad] + good[1:], net, "thermal")
    with pytest.raises(ModelFormatError, match="missing \\['t_motor'\\]"):
        wrap_thermal_surrogate(good[:2], net, "thermal")
    with pytest.raises(ModelFormatError, match="unexpected \\['t_chassis'\\]"):
        extra = table_model(GridTable([Axis("q_battery", "W", [0.0, 1.0])],
                                      [0.0, 1.0]), PortTag("t_chassis", "K"))
        wrap_thermal_surrogate(good + [extra], net, "thermal")


def test_thermal_surrogate_binds_boundary_temperatures():
    net = single_node(capacity=500.0, conductance=25.0, ambient=300.0)
    # t_ss = t_ambient + q/25, expressed with the ambient as a model input
    table = GridTable(
        [Axis("t_ambient", "K", [250.0, 350.0]),
         Axis("q_battery", "W", [0.0, 1000.0])],
        [250.0, 290.0, 350.0, 390.0],
    )
    comp = wrap_thermal_surrogate(
        table_model(table, PortTag("t_battery", "K")), net, "thermal")
    outs, _ = comp.step({"q_battery": 500.0}, comp.initial_state(), 0.01)
    assert outs["t_battery"] == pytest.approx(300.0 + 500.0 / 25.0, rel=1e-12)
