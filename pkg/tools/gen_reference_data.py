"""Regenerate the shipped data files from the default parameter formulas.

Writes src/evsim/data/: the urban and cruise drive cycles plus the two
scenario configs whose inline tables mirror defaults.py exactly.  Run
from anywhere; paths are anchored to this file.
"""

from __future__ import annotations

import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(os.path.dirname(HERE), "src"))

from evsim import defaults  # noqa: E402

DATA = os.path.join(os.path.dirname(HERE), "src", "evsim", "data")

URBAN_BREAKPOINTS = [
    (0, 0), (10, 0), (30, 10), (55, 10), (70, 0), (85, 0),
    (105, 15), (135, 15), (155, 0), (165, 0), (185, 12), (215, 12),
    (232, 0), (245, 0), (262, 8), (292, 8), (304, 0), (320, 0),
    (340, 14), (370, 14), (390, 0), (410, 0), (430, 11), (465, 11),
    (482, 0), (500, 0), (520, 13), (550, 13), (570, 0), (600, 0),
]


def write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)
    print(f"wrote {path}")


def cycle_csv(points):
    lines = ["time_s,speed_mps"]
    for t, v in points:
        lines.append(f"{float(t)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"


def fmt_list(values, per_line=6, indent="  "):
    parts = [repr(float(v)) for v in values]
    lines = []
    for i in range(0, len(parts), per_line):
        lines.append(indent + ", ".join(parts[i:i + per_line]) + ",")
    return "[\n" + "\n".join(lines) + "\n]"


def fmt_rows(rows):
    lines = []
    for row in rows:
        lines.append("  [" + ", ".join(repr(float(v)) for v in row) + "],")
    return "[\n" + "\n".join(lines) + "\n]"


def scenario_toml(name, cycle_file, duration, initial_speed):
    bp = defaults.default_battery_params()
    soc_nodes = list(bp.ocv_table.axes[0].coords)
    volts = [bp.ocv_table.eval((s,)) for s in soc_nodes]
    r0_soc = list(bp.r0_table.axes[0].coords)
    r0_temp = list(bp.r0_table.axes[1].coords)
    ohms = [[defaults.r0_pack(s, t) for t in r0_temp] for s in r0_soc]
    speeds = defaults.MOTOR_SPEED_NODES
    torques = defaults.MOTOR_TORQUE_NODES
    loss = [[defaults.motor_loss_w(s, t) for t in torques] for s in speeds]
    eff = [[defaults.inverter_eff(s, t) for t in torques] for s in speeds]
    net = defaults.default_thermal_network()
    rules = defaults.default_controller_rules()

    out = []
    a = out.append
    a("# Reference scenario: 400 V-class pack, 100 kW drive, flat road.")
    a("# Tables are inline so a run depends on nothing but this file and")
    a("# the cycle CSV next to it.")
    a("")
    a("[scenario]")
    a(f'name = "{name}"')
    a("dt = 0.01")
    a(f'cycle = "{cycle_file}"')
    a(f"duration = {float(duration)!r}")
    a(f"initial_speed = {float(initial_speed)!r}")
    a("")
    a("[vehicle]")
    a("mass_kg = 1500.0")
    a("c_rr = 0.01")
    a("air_density = 1.2")
    a("cd_a = 0.6")
    a("wheel_radius_m = 0.3")
    a("gear_ratio = 8.0")
    a("driveline_eff = 0.97")
    a("gravity = 9.81")
    a("grade = 0.0")
    a("")
    a("[driver]")
    a("kp = 80.0")
    a("ki = 15.0")
    a("torque_clamp = 250.0")
    a("integrator_clamp = 120.0")
    a("")
    a("[controller]")
    a(f"regen_enabled = {'true' if rules.regen_enabled else 'false'}")
    a(f"regen_torque_cap = {rules.regen_torque_cap!r}")
    for node, band in rules.derating.items():
        a("")
        a(f"[controller.derating.{node}]")
        a(f"warn_k = {band.warn_k!r}")
        a(f"cutoff_k = {band.cutoff_k!r}")
    a("")
    a("[battery]")
    a('variant = "physics"')
    a(f"capacity_ah = {bp.capacity_ah!r}")
    a(f"initial_soc = {bp.initial_soc!r}")
    a(f"initial_temp_k = {bp.initial_temp_k!r}")
    a(f"max_discharge_a = {bp.max_discharge_a!r}")
    a(f"max_charge_a = {bp.max_charge_a!r}")
    a(f"soc_bounds = [{bp.soc_bounds[0]!r}, {bp.soc_bounds[1]!r}]")
    a(f"temp_warn_k = {bp.temp_warn_k!r}")
    a(f"temp_cutoff_k = {bp.temp_cutoff_k!r}")
    a("")
    a("[battery.ocv]")
    a(f"soc = {fmt_list(soc_nodes)}")
    a(f"volts = {fmt_list(volts, per_line=4)}")
    a("")
    a("[battery.r0]")
    a(f"soc = {fmt_list(r0_soc, per_line=5)}")
    a(f"temp_k = {fmt_list(r0_temp, per_line=5)}")
    a(f"ohms = {fmt_rows(ohms)}")
    a("")
    a("[inverter]")
    a('variant = "physics"')
    a("max_modulation = 1.0")
    a("efficiency_floor = 0.5")
    a("accessory_power_w = 0.0")
    a("")
    a("[inverter.efficiency]")
    a(f"speed = {fmt_list(speeds, per_line=5)}")
    a(f"torque = {fmt_list(torques, per_line=6)}")
    a(f"eff = {fmt_rows(eff)}")
    a("")
    a("[motor]")
    a('variant = "physics"')
    a("t_max_nm = 250.0")
    a("base_speed = 400.0")
    a("p_max_w = 100000.0")
    a("rotor_inertia = 0.12")
    a("pole_pairs = 4")
    a("tau_s = 0.02")
    a("v_amp_rated = 195.0")
    a("")
    a("[motor.loss]")
    a(f"speed = {fmt_list(speeds, per_line=5)}")
    a(f"torque = {fmt_list(torques, per_line=6)}")
    a(f"watts = {fmt_rows(loss)}")
    a("")
    a("[thermal]")
    a('variant = "physics"')
    a(f"ambient_k = {net.ambient_k!r}")
    a(f"coolant_k = {net.coolant_k!r}")
    for node in net.nodes:
        a("")
        a("[[thermal.node]]")
        a(f'id = "{node.id}"')
        a(f"heat_capacity = {node.heat_capacity!r}")
        a(f"initial_k = {node.initial_k!r}")
    for edge in net.edges:
        a("")
        a("[[thermal.edge]]")
        a(f'a = "{edge.a}"')
        a(f'b = "{edge.b}"')
        a(f"conductance = {edge.conductance!r}")
    a("")
    a("[feedback]")
    a("edges = [")
    from evsim.scenario import CANONICAL_FEEDBACK
    for edge in CANONICAL_FEEDBACK:
        a(f'  "{edge}",')
    a("]")
    a("")
    return "\n".join(out)


def main():
    os.makedirs(DATA, exist_ok=True)
    write(os.path.join(DATA, "urban_reference.csv"),
          cycle_csv(URBAN_BREAKPOINTS))
    write(os.path.join(DATA, "cruise_20mps.csv"),
          cycle_csv([(0, 20), (60, 20)]))
    write(os.path.join(DATA, "reference_scenario.toml"),
          scenario_toml("urban_reference", "urban_reference.csv", 600.0, 0.0))
    write(os.path.join(DATA, "cruise_scenario.toml"),
          scenario_toml("cruise_20mps", "cruise_20mps.csv", 60.0, 20.0))


if __name__ == "__main__":
    main()
