"""Longitudinal vehicle load model.

Point-mass dynamics with rolling, aerodynamic, and grade resistance,
reflected to the motor shaft through a single-ratio driveline.  In the
assembled powertrain the vehicle mass is reflected onto the motor shaft
(rigid coupling), so the component here is kinematic: it reports road
speed and the resistance load torque, while acceleration is integrated
by the motor against the effective inertia.  `vehicle_step` provides the
standalone force-balance form of the same dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Component, PortSpec


@dataclass(frozen=True)
class VehicleParams:
    mass_kg: float = 1500.0
    c_rr: float = 0.01
    air_density: float = 1.2  # kg/m^3
    cd_a: float = 0.6  # drag coefficient times frontal area, m^2
    wheel_radius_m: float = 0.3
    gear_ratio: float = 8.0
    driveline_eff: float = 0.97
    gravity: float = 9.81
    grade: float = 0.0  # rise over run

    def __post_init__(self):
        if not (self.mass_kg > 0 and self.wheel_radius_m > 0 and self.gear_ratio > 0):
            raise ValueError("mass, wheel radius, and gear ratio must be positive")
        if not 0.0 < self.driveline_eff <= 1.0:
            raise ValueError("driveline_eff must lie in (0, 1]")
        if self.c_rr < 0 or self.cd_a < 0 or self.air_density <= 0:
            raise ValueError("resistance parameters out of range")


def resistance_force(params: VehicleParams, v: float) -> float:
    """Rolling + aero + grade force opposing motion (signed with v)."""
    sign = math.copysign(1.0, v) if v != 0.0 else 0.0
    f_roll = params.c_rr * params.mass_kg * params.gravity * sign
    f_aero = 0.5 * params.air_density * params.cd_a * v * v * sign
    f_grade = params.mass_kg * params.gravity * params.grade
    return f_roll + f_aero + f_grade


def load_torque(params: VehicleParams, v: float) -> float:
    """Resistance reflected to the motor shaft."""
    return (resistance_force(params, v) * params.wheel_radius_m
            / (params.gear_ratio * params.driveline_eff))


def vehicle_step(params: VehicleParams, v, t_shaft, dt):
    """Standalone force balance: (v', t_load_back).

    Driveline efficiency multiplies tractive torque when driving and
    divides when the shaft torque is negative (losses oppose the flow).
    Speed never integrates below zero (no reverse creep).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if v < 0:
        raise ValueError("v must be >= 0")
    r = params.wheel_radius_m
    if t_shaft >= 0:
        f_trac = t_shaft * params.gear_ratio * params.driveline_eff / r
    else:
        f_trac = t_shaft * params.gear_ratio / (params.driveline_eff * r)
    f_res = resistance_force(params, v)
    v_next = max(0.0, v + dt * (f_trac - f_res) / params.mass_kg)
    return v_next, load_torque(params, v)


def effective_inertia(params: VehicleParams, rotor_inertia: float) -> float:
    """Rotor inertia plus the vehicle mass reflected through the gearing."""
    r_over_g = params.wheel_radius_m / params.gear_ratio
    return rotor_inertia + params.mass_kg * r_over_g * r_over_g


class VehicleComponent(Component):
    """Kinematic vehicle: speed from shaft speed, load torque from speed."""

    PORTS = [
        PortSpec("omega", "in", "rad/s"),
        PortSpec("v", "out", "m/s"),
        PortSpec("t_load", "out", "N*m"),
    ]

    def __init__(self, component_id, params: VehicleParams, initial_speed=0.0):
        super().__init__(component_id, self.PORTS)
        self.params = params
        self.initial_speed = initial_speed

    def _outputs(self, v):
        return {"v": v, "t_load": load_torque(self.params, v)}

    def initial_outputs(self, state):
        return self._outputs(self.initial_speed)

    def step(self, inputs, state, dt):
        v = inputs["omega"] * self.params.wheel_radius_m / self.params.gear_ratio
        return self._outputs(v), state
