"""Equivalent-circuit battery: voltage, SOC, RC branch, limits, swap shell."""

import math

import pytest

from evsim.battery import (BatteryComponent, BatteryParams, BatteryState,
                           battery_limits, ocv, step_battery)
from evsim.errors import StepError
from evsim.tables import Axis, GridTable


def make_params(**overrides):
    soc_nodes = [k * 0.1 for k in range(11)]
    fields = dict(
        capacity_ah=50.0,
        ocv_table=GridTable([Axis("soc", "1", soc_nodes)],
                            [300.0 + 90.0 * s for s in soc_nodes]),
        r0_table=GridTable(
            [Axis("soc", "1", [0.0, 1.0]), Axis("temp_k", "K", [280.0, 320.0])],
            [0.10, 0.08, 0.06, 0.05],
        ),
    )
    fields.update(overrides)
    return BatteryParams(**fields)


def test_ocv_interpolates_and_rejects_out_of_range():
    p = make_params()
    assert ocv(p, 0.5) == pytest.approx(345.0)
    assert ocv(p, 0.55) == pytest.approx(349.5)
    with pytest.raises(ValueError, match="outside"):
        ocv(p, 1.2)
    with pytest.raises(ValueError, match="outside"):
        ocv(p, -0.01)


def test_terminal_voltage_drops_by_ir():
    p = make_params()
    state = BatteryState(soc=0.5)
    r0 = p.r0_table.eval((0.5, 300.0))
    _, v, heat = step_battery(p, state, 100.0, 0.01, 300.0)
    assert v == pytest.approx(345.0 - 100.0 * r0)
    assert heat == pytest.approx(100.0 ** 2 * r0)
    # charging raises the terminal voltage above OCV
    _, v_chg, _ = step_battery(p, state, -100.0, 0.01, 300.0)
    assert v_chg == pytest.approx(345.0 + 100.0 * r0)


def test_soc_coulomb_counting():
    p = make_params()
    state = BatteryState(soc=0.5)
    # 50 Ah pack: 180 A for one 0.01 s step moves soc by 1e-5
    state, _, _ = step_battery(p, state, 180.0, 0.01, 300.0)
    assert state.soc == pytest.approx(0.5 - 180.0 * 0.01 / (3600.0 * 50.0))
    assert not state.clamped


def test_soc_clamps_at_bounds_and_flags():
    p = make_params()
    low = BatteryState(soc=p.soc_bounds[0])
    state, _, _ = step_battery(p, low, 500.0, 1.0, 300.0)
    assert state.soc == p.soc_bounds[0]
    assert state.clamped
    # charging away from the bound clears the flag
    state, _, _ = step_battery(p, state, -10.0, 1.0, 300.0)
    assert not state.clamped


def test_rc_branch_relaxes_toward_ir():
    # constant current: u -> i*R with time constant R*C (explicit Euler)
    r, c = 0.002, 3000.0
    p = make_params(rc_pairs=((r, c),))
    dt = 0.01
    i = 200.0
    state = BatteryState(soc=0.9, rc_voltage=(0.0,))
    for _ in range(int(10 * r * c / dt)):  # ten time constants
        state, v, heat = step_battery(p, state, i, dt, 300.0)
    assert state.rc_voltage[0] == pytest.approx(i * r, rel=1e-3)
    # terminal voltage now sags by the extra polarization term
    r0 = p.r0_table.eval((state.soc, 300.0))
    assert v == pytest.approx(ocv(p, state.soc) - i * r0 - i * r, rel=1e-3)
    # heat picks up the branch dissipation u^2/r on top of i^2 r0
    assert heat == pytest.approx(i * i * r0 + (i * r) ** 2 / r, rel=1e-2)


def test_rc_transient_matches_discrete_recurrence():
    r, c = 0.004, 1500.0
    p = make_params(rc_pairs=((r, c),))
    dt = 0.01
    i = 150.0
    state = BatteryState(soc=0.8, rc_voltage=(0.0,))
    u_ref = 0.0
    for _ in range(500):
        state, _, _ = step_battery(p, state, i, dt, 300.0)
        u_ref = u_ref + dt * (i / c - u_ref / (r * c))
        assert state.rc_voltage[0] == pytest.approx(u_ref, rel=1e-12, abs=1e-15)


def test_current_limit_violations_raise():
    p = make_params(max_discharge_a=300.0, max_charge_a=100.0)
    state = BatteryState(soc=0.5)
    with pytest.raises(StepError, match="exceeds the configured discharge"):
        step_battery(p, state, 301.0, 0.01, 300.0)
    with pytest.raises(StepError, match="exceeds the configured charge"):
        step_battery(p, state, -101.0, 0.01, 300.0)
    # exactly at the limit passes (slack covers float noise)
    step_battery(p, state, 300.0, 0.01, 300.0)
    step_battery(p, state, 300.0 * (1.0 + 1e-9), 0.01, 300.0)


def test_limits_derate_linearly_with_temperature():
    p = make_params()
    state = BatteryState(soc=0.5)
    assert battery_limits(p, state, 298.15) == (600.0, 300.0)
    mid = (p.temp_warn_k + p.temp_cutoff_k) / 2
    dis, chg = battery_limits(p, state, mid)
    assert dis == pytest.approx(300.0)
    assert chg == pytest.approx(150.0)
    assert battery_limits(p, state, p.temp_cutoff_k) == (0.0, 0.0)
    assert battery_limits(p, state, p.temp_cutoff_k + 50.0) == (0.0, 0.0)


def test_limits_zero_at_soc_bounds():
    p = make_params()
    dis, chg = battery_limits(p, BatteryState(soc=p.soc_bounds[0]), 298.15)
    assert dis == 0.0 and chg == 300.0
    dis, chg = battery_limits(p, BatteryState(soc=p.soc_bounds[1]), 298.15)
    assert dis == 600.0 and chg == 0.0


def test_params_validation():
    with pytest.raises(ValueError, match="capacity"):
        make_params(capacity_ah=0.0)
    with pytest.raises(ValueError, match="strictly increasing"):
        make_params(ocv_table=GridTable([Axis("soc", "1", [0.0, 1.0])],
                                        [350.0, 300.0]))
    with pytest.raises(ValueError, match="within \\[0, 1\\]"):
        make_params(ocv_table=GridTable([Axis("soc", "1", [0.0, 1.5])],
                                        [300.0, 400.0]))
    with pytest.raises(ValueError, match="positive"):
        make_params(r0_table=GridTable(
            [Axis("soc", "1", [0.0, 1.0]), Axis("temp_k", "K", [280.0, 320.0])],
            [0.1, 0.1, 0.0, 0.1]))
    with pytest.raises(ValueError, match="at most one RC"):
        make_params(rc_pairs=((0.01, 100.0), (0.02, 200.0)))
    with pytest.raises(ValueError, match="rc pair 0"):
        make_params(rc_pairs=((0.0, 100.0),))
    with pytest.raises(ValueError, match="soc_bounds"):
        make_params(soc_bounds=(0.9, 0.1))
    with pytest.raises(ValueError, match="initial_soc"):
        make_params(initial_soc=0.99)
    with pytest.raises(ValueError, match="temp_warn_k"):
        make_params(temp_warn_k=340.0)


def test_component_ports_and_initial_outputs():
    comp = BatteryComponent("battery", make_params())
    assert {p.name for p in comp.inputs} == {"i_dc", "cell_temp"}
    out = comp.initial_outputs(comp.initial_state())
    assert out["v_term"] == pytest.approx(ocv(comp.params, 0.9))
    assert out["soc"] == 0.9
    assert out["heat"] == 0.0
    assert out["soc_violation"] == 0.0
    assert out["max_discharge_a"] == 600.0


def test_component_step_matches_step_battery():
    comp = BatteryComponent("battery", make_params())
    state = comp.initial_state()
    outs, state2 = comp.step({"i_dc": 50.0, "cell_temp": 300.0}, state, 0.01)
    ref_state, ref_v, ref_heat = step_battery(comp.params, state, 50.0, 0.01, 300.0)
    assert outs["v_term"] == ref_v
    assert outs["heat"] == ref_heat
    assert state2 == ref_state


def test_surrogate_core_path():
    p = make_params()
    core = lambda soc, i_dc, temp: ocv(p, soc) - i_dc * 0.07 - 1e-4 * i_dc ** 2
    comp = BatteryComponent("battery", p, core=core)
    state = comp.initial_state()
    outs, state2 = comp.step({"i_dc": 100.0, "cell_temp": 300.0}, state, 0.01)
    assert outs["v_term"] == pytest.approx(core(0.9, 100.0, 300.0))
    # heat derived from the core's own voltage sag at this current
    v_sag = core(0.9, 0.0, 300.0) - core(0.9, 100.0, 300.0)
    assert outs["heat"] == pytest.approx(100.0 * v_sag)
    assert outs["heat"] > 0.0
    assert state2.rc_voltage == ()
    # a core that raises voltage under discharge would imply negative heat;
    # the shell floors it at zero
    rising = lambda soc, i_dc, temp: 300.0 + 0.01 * i_dc
    comp2 = BatteryComponent("battery", p, core=rising)
    outs2, _ = comp2.step({"i_dc": 100.0, "cell_temp": 300.0}, state, 0.01)
    assert outs2["heat"] == 0.0


def test_surrogate_core_soc_still_integrates_and_limits_apply():
    p = make_params(max_discharge_a=200.0)
    comp = BatteryComponent("battery", p, core=lambda s, i, t: 350.0)
    state = comp.initial_state()
    _, state2 = comp.step({"i_dc": 100.0, "cell_temp": 300.0}, state, 0.01)
    assert state2.soc < state.soc
    with pytest.raises(StepError, match="exceeds"):
        comp.step({"i_dc": 250.0, "cell_temp": 300.0}, state, 0.01)


def test_heat_is_nonnegative_property():
    # random walk over admissible currents and temperatures
    import random
    rng = random.Random(1234)
    p = make_params(rc_pairs=((0.003, 2000.0),))
    state = BatteryState(soc=0.5, rc_voltage=(0.0,))
    for _ in range(2000):
        i = rng.uniform(-300.0, 600.0)
        t = rng.uniform(280.0, 320.0)
        state, v, heat = step_battery(p, state, i, 0.01, t)
        assert heat >= 0.0
        assert math.isfinite(v)
        assert p.soc_bounds[0] <= state.soc <= p.soc_bounds[1]
