"""Map-based electric motor plant.

Quasi-static torque-speed envelope with a first-order torque lag instead
of electrical dynamics; the loss map covers the full operating envelope.
AC current comes from the power balance at unity power factor.  The
electrical frequency input is consistency-checked against pole_pairs and
speed but carries no physics of its own.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .core import Component, PortSpec
from .errors import StepError
from .tables import GridTable

logger = logging.getLogger(__name__)

_OMEGA_EPS = 1e-6  # rad/s floor for the constant-power division
_V_EPS = 1e-9  # volts; below this no current flows

# elec_freq disagreement beyond max(2 Hz, 2%) is logged once per run
_FREQ_ABS_TOL = 2.0
_FREQ_REL_TOL = 0.02


@dataclass(frozen=True)
class MotorParams:
    t_max_nm: float
    base_speed: float  # rad/s
    p_max_w: float
    loss_map: GridTable  # 2-D (speed rad/s, torque N*m) -> W
    rotor_inertia: float  # kg*m^2
    pole_pairs: int = 4
    tau_s: float = 0.02  # torque response time constant
    v_amp_rated: float = 195.0  # phase amplitude needed at/above base speed

    def __post_init__(self):
        for name in ("t_max_nm", "base_speed", "p_max_w", "rotor_inertia",
                     "tau_s", "v_amp_rated"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.pole_pairs < 1:
            raise ValueError("pole_pairs must be >= 1")
        if abs(self.p_max_w - self.t_max_nm * self.base_speed) > 1e-6 * self.p_max_w:
            raise ValueError(
                f"p_max_w {self.p_max_w} inconsistent with t_max_nm * base_speed "
                f"= {self.t_max_nm * self.base_speed}"
            )
        if len(self.loss_map.axes) != 2:
            raise ValueError("loss_map must be 2-D over (speed, torque)")
        if self.loss_map.min_value() < 0:
            raise ValueError("loss_map values must be >= 0")
        if abs(self.loss_map.eval((0.0, 0.0))) > 1e-12:
            raise ValueError("loss_map(0, 0) must be 0")
        # nondecreasing along the torque axis at every speed row; the
        # controller's power-budget bisection relies on this
        n_t = len(self.loss_map.axes[1].coords)
        vals = self.loss_map.values
        for r in range(len(self.loss_map.axes[0].coords)):
            row = vals[r * n_t:(r + 1) * n_t]
            if any(b < a for a, b in zip(row, row[1:])):
                raise ValueError(
                    "loss_map must be nondecreasing along the torque axis"
                )


@dataclass(frozen=True)
class MotorState:
    omega: float  # rad/s
    t_actual: float  # N*m realized electromagnetic torque
    freq_warned: bool = False


def torque_capability(params: MotorParams, omega, v_amp) -> float:
    """Available torque magnitude at this speed and phase amplitude.

    Envelope min(t_max, p_max/|omega|) scaled by voltage availability;
    the rated amplitude grows linearly with speed up to base speed, so at
    standstill any positive voltage unlocks the full envelope.
    """
    if v_amp <= 0.0:
        return 0.0
    w = abs(omega)
    envelope = min(params.t_max_nm, params.p_max_w / max(w, _OMEGA_EPS))
    v_rated = params.v_amp_rated * min(w / params.base_speed, 1.0)
    if v_rated <= 0.0:
        return envelope
    return envelope * min(1.0, v_amp / v_rated)


def step_motor(params, state, t_cmd, v_amp, elec_freq, t_load, dt,
               inertia=None, loss=None):
    """One step: lag toward the capability-clamped command, integrate speed.

    Returns (state', t_shaft, omega, p_ac, i_amp, heat).  `inertia`
    overrides the rotor inertia so a rigidly coupled vehicle mass can be
    reflected onto the shaft; `loss(speed, torque) -> W` overrides the
    physics loss map (surrogate core swap).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    for name, v in (("t_cmd", t_cmd), ("v_amp", v_amp),
                    ("elec_freq", elec_freq), ("t_load", t_load)):
        if not math.isfinite(v):
            raise StepError(f"motor input {name} is not finite")
    j = params.rotor_inertia if inertia is None else inertia
    cap = torque_capability(params, state.omega, v_amp)
    t_target = min(max(t_cmd, -cap), cap)
    t_new = state.t_actual + (dt / params.tau_s) * (t_target - state.t_actual)
    # the lag can overshoot a freshly shrunk envelope; the clamp keeps the
    # realized torque inside capability every step
    t_new = min(max(t_new, -cap), cap)
    omega_new = state.omega + dt * (t_new - t_load) / j
    if loss is None:
        heat = params.loss_map.eval((abs(state.omega), abs(t_new)))
    else:
        heat = max(loss(abs(state.omega), abs(t_new)), 0.0)
    p_ac = t_new * omega_new + heat
    i_amp = 2.0 * p_ac / (3.0 * v_amp) if v_amp > _V_EPS else 0.0

    warned = state.freq_warned
    f_expect = params.pole_pairs * abs(state.omega) / (2.0 * math.pi)
    if not warned and abs(elec_freq - f_expect) > max(
            _FREQ_ABS_TOL, _FREQ_REL_TOL * f_expect):
        logger.warning(
            "elec_freq %.2f Hz disagrees with pole_pairs*omega/(2*pi) = %.2f Hz",
            elec_freq, f_expect,
        )
        warned = True
    return MotorState(omega_new, t_new, warned), t_new, omega_new, p_ac, i_amp, heat


class MotorComponent(Component):
    PORTS = [
        PortSpec("t_cmd", "in", "N*m"),
        PortSpec("v_amp", "in", "V"),
        PortSpec("freq", "in", "Hz"),
        PortSpec("t_load", "in", "N*m"),
        PortSpec("t_shaft", "out", "N*m"),
        PortSpec("omega", "out", "rad/s"),
        PortSpec("p_ac", "out", "W"),
        PortSpec("i_amp", "out", "A"),
        PortSpec("heat", "out", "W"),
    ]

    def __init__(self, component_id, params: MotorParams, inertia=None,
                 initial_omega=0.0, loss_source=None):
        super().__init__(component_id, self.PORTS)
        self.params = params
        self.inertia = params.rotor_inertia if inertia is None else inertia
        self.initial_omega = initial_omega
        self._loss_source = loss_source

    def initial_state(self):
        return MotorState(self.initial_omega, 0.0)

    def initial_outputs(self, state):
        return {
            "t_shaft": state.t_actual,
            "omega": state.omega,
            "p_ac": 0.0,
            "i_amp": 0.0,
            "heat": 0.0,
        }

    def step(self, inputs, state, dt):
        state, t_shaft, omega, p_ac, i_amp, heat = step_motor(
            self.params, state, inputs["t_cmd"], inputs["v_amp"],
            inputs["freq"], inputs["t_load"], dt, inertia=self.inertia,
            loss=self._loss_source,
        )
        return {
            "t_shaft": t_shaft,
            "omega": omega,
            "p_ac": p_ac,
            "i_amp": i_amp,
            "heat": heat,
        }, state
