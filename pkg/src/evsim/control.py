"""Rule-based control layer.

A PI driver turns the target-speed error into a torque request; the
powertrain controller arbitrates that request against motor capability,
the battery power budget, thermal derating, and the regen policy, then
emits inverter commands.  All four arbitration rules are clamps applied
in a fixed order, which makes arbitration idempotent and monotone in the
request.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .core import Component, PortSpec
from .motor import MotorParams, torque_capability

logger = logging.getLogger(__name__)

_BUDGET_BISECTIONS = 60  # fixed iteration count keeps runs deterministic


@dataclass(frozen=True)
class DriverParams:
    kp: float  # N*m per m/s
    ki: float  # N*m per (m/s * s)
    torque_clamp: float  # +- N*m on the request
    integrator_clamp: float  # +- N*m held by the integral term

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0:
            raise ValueError("kp and ki must be >= 0")
        if not (self.torque_clamp > 0 and self.integrator_clamp > 0):
            raise ValueError("clamps must be positive")


@dataclass(frozen=True)
class DeratingBand:
    warn_k: float
    cutoff_k: float

    def __post_init__(self):
        if not self.warn_k < self.cutoff_k:
            raise ValueError(
                f"derating band warn {self.warn_k} must be below cutoff {self.cutoff_k}"
            )

    def factor(self, temp_k: float) -> float:
        if temp_k <= self.warn_k:
            return 1.0
        if temp_k >= self.cutoff_k:
            return 0.0
        return (self.cutoff_k - temp_k) / (self.cutoff_k - self.warn_k)


@dataclass(frozen=True)
class ControllerRules:
    derating: dict  # temperature node id -> DeratingBand
    regen_enabled: bool = True
    regen_torque_cap: float = 150.0

    def __post_init__(self):
        if self.regen_torque_cap < 0:
            raise ValueError("regen_torque_cap must be >= 0")


def driver_step(params: DriverParams, v_target, v_actual, integrator, dt):
    """PI law with output clamp and conditional anti-windup.

    While the pre-update output is already saturated the integrator is
    frozen, so it never winds past what the clamp can deliver.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    error = v_target - v_actual
    lim = params.torque_clamp
    unsat = params.kp * error + integrator
    if abs(unsat) >= lim:
        return math.copysign(lim, unsat), integrator
    i_lim = params.integrator_clamp
    integrator = min(max(integrator + params.ki * error * dt, -i_lim), i_lim)
    request = params.kp * error + integrator
    return min(max(request, -lim), lim), integrator


def _power_budget_clamp(magnitude, sign, omega, loss, p_limit):
    """Largest torque magnitude within the battery power budget.

    The estimated electrical power t*omega + loss(|omega|, t) must stay
    within [-p_charge, p_discharge]; `p_limit` is the bound on the active
    side.  Bisection keeps the feasible endpoint, so the result satisfies
    the budget for any loss map that is nondecreasing in torque.
    """
    def power(mag):
        return sign * mag * omega + loss(abs(omega), mag)

    def feasible(mag):
        p = power(mag)
        return p <= p_limit if sign * omega >= 0 else p >= -p_limit

    if feasible(magnitude):
        return magnitude
    lo, hi = 0.0, magnitude
    if not feasible(lo):
        return 0.0
    for _ in range(_BUDGET_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def arbitrate(rules: ControllerRules, motor: MotorParams, torque_request,
              omega, v_dc, battery_limits, temps, max_modulation=1.0,
              loss=None):
    """(t_cmd, mod_index, elec_freq) from the request and the constraints.

    Clamp order: (1) motor capability at full amplitude, (2) battery power
    budget, (3) thermal derating as a fraction of capability, (4) regen
    policy.  battery_limits is (max_discharge_a, max_charge_a); temps maps
    node ids onto kelvins for the derating bands.
    """
    if loss is None:
        loss = lambda s, t: motor.loss_map.eval((s, t))
    # capability at the amplitude the inverter can actually deliver, so the
    # proportional mod_index below never commands torque the motor will
    # re-clamp for lack of voltage
    cap = torque_capability(motor, omega, max_modulation * v_dc / 2.0)
    t = min(max(torque_request, -cap), cap)

    max_discharge_a, max_charge_a = battery_limits
    p_limit = max_discharge_a * v_dc if t * omega >= 0 else max_charge_a * v_dc
    mag = _power_budget_clamp(abs(t), math.copysign(1.0, t), omega, loss, p_limit)
    t = math.copysign(mag, t)

    derate = 1.0
    for node, band in rules.derating.items():
        if node in temps:
            derate = min(derate, band.factor(temps[node]))
    t = min(max(t, -derate * cap), derate * cap)

    if t * omega < 0.0:
        regen_cap = rules.regen_torque_cap if rules.regen_enabled else 0.0
        if max_charge_a <= 0.0:
            regen_cap = 0.0
        t = min(max(t, -regen_cap), regen_cap)

    mod_index = abs(t) / cap * max_modulation if cap > 1e-12 else 0.0
    mod_index = min(mod_index, max_modulation)
    elec_freq = motor.pole_pairs * abs(omega) / (2.0 * math.pi)
    return t, mod_index, elec_freq


class DriverComponent(Component):
    PORTS = [
        PortSpec("v_target", "in", "m/s"),
        PortSpec("v_actual", "in", "m/s"),
        PortSpec("torque_request", "out", "N*m"),
    ]

    def __init__(self, component_id, params: DriverParams):
        super().__init__(component_id, self.PORTS)
        self.params = params

    def initial_state(self):
        return 0.0  # integrator, N*m

    def initial_outputs(self, state):
        return {"torque_request": 0.0}

    def step(self, inputs, state, dt):
        request, integrator = driver_step(
            self.params, inputs["v_target"], inputs["v_actual"], state, dt
        )
        return {"torque_request": request}, integrator


class ControllerComponent(Component):
    """Arbitration component.

    Consumes the driver request plus one-tick-delayed feedback: motor
    speed and realized torque, battery voltage and current limits, and
    node temperatures.  The realized torque enters a plausibility check
    only; the arbitration rules run on the commanded side.
    """

    PORTS = [
        PortSpec("torque_request", "in", "N*m"),
        PortSpec("omega", "in", "rad/s"),
        PortSpec("t_shaft", "in", "N*m"),
        PortSpec("v_dc", "in", "V"),
        PortSpec("max_discharge_a", "in", "A"),
        PortSpec("max_charge_a", "in", "A"),
        PortSpec("t_battery", "in", "K"),
        PortSpec("t_inverter", "in", "K"),
        PortSpec("t_motor", "in", "K"),
        PortSpec("t_cmd", "out", "N*m"),
        PortSpec("mod_index", "out", "1"),
        PortSpec("elec_freq", "out", "Hz"),
    ]

    def __init__(self, component_id, rules: ControllerRules,
                 motor: MotorParams, max_modulation=1.0, loss_source=None):
        super().__init__(component_id, self.PORTS)
        self.rules = rules
        self.motor = motor
        self.max_modulation = max_modulation
        self._loss_source = loss_source
        self._torque_warned = False

    def initial_outputs(self, state):
        return {"t_cmd": 0.0, "mod_index": 0.0, "elec_freq": 0.0}

    def step(self, inputs, state, dt):
        omega = inputs["omega"]
        v_dc = inputs["v_dc"]
        if not self._torque_warned:
            cap = torque_capability(self.motor, omega, v_dc / 2.0)
            if abs(inputs["t_shaft"]) > cap * (1.0 + 1e-6) + 1e-9:
                logger.warning(
                    "realized torque %.2f N*m reported above capability %.2f N*m",
                    inputs["t_shaft"], cap,
                )
                self._torque_warned = True
        t_cmd, mod_index, elec_freq = arbitrate(
            self.rules, self.motor, inputs["torque_request"], omega, v_dc,
            (inputs["max_discharge_a"], inputs["max_charge_a"]),
            {
                "battery": inputs["t_battery"],
                "inverter": inputs["t_inverter"],
                "motor": inputs["t_motor"],
            },
            self.max_modulation, self._loss_source,
        )
        return {"t_cmd": t_cmd, "mod_index": mod_index, "elec_freq": elec_freq}, state
