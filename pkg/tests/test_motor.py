"""Motor envelope, torque lag, speed integration, and the power balance."""

import logging
import math

import pytest

from evsim.motor import MotorComponent, MotorParams, MotorState, step_motor, torque_capability
from evsim.tables import Axis, GridTable


def quadratic_loss_map():
    speeds = [0.0, 200.0, 400.0, 800.0]
    torques = [0.0, 50.0, 100.0, 200.0, 300.0]
    return GridTable(
        [Axis("speed", "rad/s", speeds), Axis("torque", "N*m", torques)],
        [0.002 * t * t + 0.1 * s for s in speeds for t in torques],
    )


def make_params(**overrides):
    fields = dict(
        t_max_nm=250.0,
        base_speed=400.0,
        p_max_w=100000.0,
        loss_map=quadratic_loss_map(),
        rotor_inertia=0.12,
        pole_pairs=4,
        tau_s=0.02,
        v_amp_rated=195.0,
    )
    fields.update(overrides)
    return MotorParams(**fields)


def test_capability_envelope():
    p = make_params()
    full = p.v_amp_rated
    # constant-torque region below base speed
    assert torque_capability(p, 200.0, full) == pytest.approx(250.0)
    # constant-power region above base speed
    assert torque_capability(p, 500.0, full) == pytest.approx(200.0)
    assert torque_capability(p, -500.0, full) == pytest.approx(200.0)
    # voltage starvation scales the whole envelope
    v_rated_200 = full * 200.0 / 400.0
    assert torque_capability(p, 200.0, v_rated_200 / 2) == pytest.approx(125.0)
    # at standstill any positive amplitude unlocks the envelope
    assert torque_capability(p, 0.0, 1e-3) == pytest.approx(250.0)
    assert torque_capability(p, 0.0, 0.0) == 0.0
    assert torque_capability(p, 500.0, -1.0) == 0.0


def test_params_validation():
    with pytest.raises(ValueError, match="p_max_w .* inconsistent"):
        make_params(p_max_w=90000.0)
    with pytest.raises(ValueError, match="must be positive"):
        make_params(tau_s=0.0)
    with pytest.raises(ValueError, match="pole_pairs"):
        make_params(pole_pairs=0)
    bad = GridTable(
        [Axis("speed", "rad/s", [0.0, 400.0]), Axis("torque", "N*m", [0.0, 100.0])],
        [0.0, 10.0, 5.0, -1.0])
    with pytest.raises(ValueError, match=">= 0"):
        make_params(loss_map=bad)
    origin = GridTable(
        [Axis("speed", "rad/s", [0.0, 400.0]), Axis("torque", "N*m", [0.0, 100.0])],
        [5.0, 10.0, 5.0, 10.0])
    with pytest.raises(ValueError, match=r"loss_map\(0, 0\)"):
        make_params(loss_map=origin)
    decreasing = GridTable(
        [Axis("speed", "rad/s", [0.0, 400.0]), Axis("torque", "N*m", [0.0, 100.0])],
        [0.0, 10.0, 20.0, 5.0])
    with pytest.raises(ValueError, match="nondecreasing along the torque"):
        make_params(loss_map=decreasing)


def test_torque_lag_first_order_step_response():
    p = make_params()
    dt = 0.01
    state = MotorState(omega=0.0, t_actual=0.0)
    # hold speed at zero by matching the load to the produced torque
    values = []
    for _ in range(8):  # 0.08 s = 4 time constants
        state, t_shaft, *_ = step_motor(
            p, MotorState(0.0, state.t_actual, state.freq_warned),
            100.0, p.v_amp_rated, 0.0, 0.0, dt)
        values.append(t_shaft)
    # discrete first-order relaxation: t_k = 100*(1 - (1 - dt/tau)^k)
    for k, t in enumerate(values, start=1):
        assert t == pytest.approx(100.0 * (1.0 - 0.5 ** k))


def test_clamp_applies_after_lag():
    p = make_params(tau_s=0.01)  # dt/tau = 1: lag lands on the command
    # command far beyond capability: realized torque sits at capability
    state = MotorState(omega=500.0, t_actual=0.0)
    state, t_shaft, *_ = step_motor(p, state, 1000.0, p.v_amp_rated, 0.0,
                                    0.0, 0.01)
    assert t_shaft == pytest.approx(200.0)  # p_max / omega
    # previously realized torque above a newly shrunk envelope clamps down
    state = MotorState(omega=500.0, t_actual=240.0)
    _, t_shaft, *_ = step_motor(p, state, 240.0, p.v_amp_rated, 0.0, 0.0, 0.01)
    assert t_shaft == pytest.approx(200.0)


def test_speed_integration_with_inertia_override():
    p = make_params(tau_s=0.01)
    state = MotorState(omega=100.0, t_actual=50.0)
    j_eff = 2.4
    state2, t_shaft, omega, *_ = step_motor(
        p, state, 50.0, p.v_amp_rated, 0.0, 20.0, 0.01, inertia=j_eff)
    assert t_shaft == pytest.approx(50.0)
    assert omega == pytest.approx(100.0 + 0.01 * (50.0 - 20.0) / j_eff)
    assert state2.omega == omega


def test_power_balance_and_phase_current():
    p = make_params(tau_s=0.01)
    state = MotorState(omega=300.0, t_actual=80.0)
    state2, t_shaft, omega, p_ac, i_amp, heat = step_motor(
        p, state, 80.0, 150.0, 0.0, 80.0, 0.01)
    assert heat == pytest.approx(p.loss_map.eval((300.0, 80.0)))
    assert p_ac == pytest.approx(t_shaft * omega + heat)
    assert i_amp == pytest.approx(2.0 * p_ac / (3.0 * 150.0))
    # no amplitude, no current
    state3 = MotorState(omega=300.0, t_actual=0.0)
    _, _, _, _, i_zero, _ = step_motor(p, state3, 0.0, 0.0, 0.0, 0.0, 0.01)
    assert i_zero == 0.0


def test_heat_uses_entry_speed_and_realized_torque_magnitudes():
    p = make_params(tau_s=0.01)
    state = MotorState(omega=-300.0, t_actual=-80.0)
    _, t_shaft, _, _, _, heat = step_motor(p, state, -80.0, 150.0, 0.0,
                                           -80.0, 0.01)
    assert t_shaft == pytest.approx(-80.0)
    assert heat == pytest.approx(p.loss_map.eval((300.0, 80.0)))


def test_loss_override_swaps_the_map_and_floors_at_zero():
    p = make_params(tau_s=0.01)
    state = MotorState(omega=300.0, t_actual=80.0)
    _, _, _, _, _, heat = step_motor(p, state, 80.0, 150.0, 0.0, 80.0, 0.01,
                                     loss=lambda s, t: 123.0)
    assert heat == 123.0
    _, _, _, _, _, floored = step_motor(p, state, 80.0, 150.0, 0.0, 80.0, 0.01,
                                        loss=lambda s, t: -5.0)
    assert floored == 0.0


def test_frequency_disagreement_warns_once(caplog):
    p = make_params()
    comp = MotorComponent("motor", p, initial_omega=100.0)
    state = comp.initial_state()
    expected = p.pole_pairs * 100.0 / (2.0 * math.pi)
    inputs = {"t_cmd": 0.0, "v_amp": 150.0, "freq": expected + 50.0,
              "t_load": 0.0}
    with caplog.at_level(logging.WARNING, logger="evsim.motor"):
        _, state = comp.step(inputs, state, 0.01)
        _, state = comp.step(inputs, state, 0.01)
    assert state.freq_warned
    warnings = [r for r in caplog.records if "disagrees" in r.message]
    assert len(warnings) == 1


def test_consistent_frequency_does_not_warn(caplog):
    p = make_params()
    comp = MotorComponent("motor", p, initial_omega=100.0)
    state = comp.initial_state()
    good = p.pole_pairs * 100.0 / (2.0 * math.pi)
    with caplog.at_level(logging.WARNING, logger="evsim.motor"):
        _, state = comp.step({"t_cmd": 0.0, "v_amp": 150.0, "freq": good,
                              "t_load": 0.0}, state, 0.01)
    assert not state.freq_warned
    assert not [r for r in caplog.records if "disagrees" in r.message]


def test_non_finite_inputs_raise_step_error():
    from evsim.errors import StepError
    p = make_params()
    with pytest.raises(StepError, match="t_cmd is not finite"):
        step_motor(p, MotorState(0.0, 0.0), float("nan"), 100.0, 0.0, 0.0, 0.01)
