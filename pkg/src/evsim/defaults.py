"""Shipped default parameter set.

Illustrative 400 V-class pack and 100 kW drive, not calibrated to any
real vehicle.  The map surfaces are smooth synthetic shapes chosen so
that closed-form checks are possible: pack OCV is quadratic in SOC,
internal resistance is multilinear in (SOC, T), motor loss is quadratic
in torque and linear in speed, and inverter efficiency varies gently
over the envelope.
"""

from __future__ import annotations

import math

from .battery import BatteryParams
from .control import ControllerRules, DeratingBand, DriverParams
from .inverter import InverterParams
from .motor import MotorParams
from .tables import Axis, GridTable
from .thermal import ThermalEdge, ThermalNetwork, ThermalNode
from .vehicle import VehicleParams

N_CELLS = 96

MOTOR_SPEED_NODES = [float(s) for s in range(0, 801, 100)]
MOTOR_TORQUE_NODES = [0.0, 5.0, 10.0, 15.0, 20.0, 30.0, 50.0,
                      75.0, 100.0, 150.0, 200.0, 250.0]


def ocv_cell(soc: float) -> float:
    return 3.0 + 0.9 * soc + 0.3 * soc * soc


def r0_pack(soc: float, temp_k: float) -> float:
    return 0.0768 * (1.25 - 0.35 * soc) * (1.0 + 0.006 * (298.15 - temp_k))


def motor_loss_w(speed: float, torque: float) -> float:
    return torque * torque * (0.35 + 0.007 * speed)


def inverter_eff(speed: float, torque: float) -> float:
    return 0.97 - 0.05 * math.exp(-torque / 40.0) - 0.012 * speed / 800.0


def default_battery_params() -> BatteryParams:
    soc_nodes = [k * 0.05 for k in range(21)]
    ocv = GridTable(
        [Axis("soc", "1", soc_nodes)],
        [N_CELLS * ocv_cell(s) for s in soc_nodes],
    )
    r0_soc = [0.0, 0.25, 0.5, 0.75, 1.0]
    r0_temp = [263.15, 283.15, 298.15, 313.15, 333.15]
    r0 = GridTable(
        [Axis("soc", "1", r0_soc), Axis("temp_k", "K", r0_temp)],
        [r0_pack(s, t) for s in r0_soc for t in r0_temp],
    )
    return BatteryParams(
        capacity_ah=50.0,
        ocv_table=ocv,
        r0_table=r0,
        max_discharge_a=600.0,
        max_charge_a=300.0,
        soc_bounds=(0.05, 0.95),
        temp_warn_k=318.15,
        temp_cutoff_k=333.15,
        initial_soc=0.9,
    )


def default_motor_params() -> MotorParams:
    loss = GridTable(
        [Axis("speed", "rad/s", MOTOR_SPEED_NODES),
         Axis("torque", "N*m", MOTOR_TORQUE_NODES)],
        [motor_loss_w(s, t) for s in MOTOR_SPEED_NODES for t in MOTOR_TORQUE_NODES],
    )
    return MotorParams(
        t_max_nm=250.0,
        base_speed=400.0,
        p_max_w=100000.0,
        loss_map=loss,
        rotor_inertia=0.12,
        pole_pairs=4,
        tau_s=0.02,
        v_amp_rated=195.0,
    )


def default_inverter_params() -> InverterParams:
    eff = GridTable(
        [Axis("speed", "rad/s", MOTOR_SPEED_NODES),
         Axis("torque", "N*m", MOTOR_TORQUE_NODES)],
        [inverter_eff(s, t) for s in MOTOR_SPEED_NODES for t in MOTOR_TORQUE_NODES],
    )
    return InverterParams(efficiency_map=eff)


def default_thermal_network() -> ThermalNetwork:
    return ThermalNetwork(
        nodes=[
            ThermalNode("battery", 3.0e5, 298.15),
            ThermalNode("inverter", 9.0e3, 298.15),
            ThermalNode("motor", 3.0e4, 298.15),
        ],
        edges=[
            ThermalEdge("battery", "coolant", 25.0),
            ThermalEdge("inverter", "coolant", 30.0),
            ThermalEdge("motor", "coolant", 40.0),
            ThermalEdge("battery", "ambient", 8.0),
            ThermalEdge("motor", "ambient", 5.0),
            ThermalEdge("inverter", "motor", 2.0),
        ],
        ambient_k=298.15,
        coolant_k=298.15,
    )


def default_vehicle_params() -> VehicleParams:
    return VehicleParams()


def default_driver_params() -> DriverParams:
    return DriverParams(kp=80.0, ki=15.0, torque_clamp=250.0,
                        integrator_clamp=120.0)


def default_controller_rules() -> ControllerRules:
    return ControllerRules(
        derating={
            "battery": DeratingBand(318.15, 333.15),
            "inverter": DeratingBand(358.15, 398.15),
            "motor": DeratingBand(378.15, 418.15),
        },
        regen_enabled=True,
        regen_torque_cap=150.0,
    )
