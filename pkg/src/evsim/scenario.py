"""Scenario configuration, graph assembly, and the energy report.

A scenario is a TOML file that selects a drive cycle, parameters for every
component, a physics-or-surrogate variant per plant, and the declared
feedback edges.  Assembly wires the fixed powertrain topology (target
speed -> driver -> controller -> inverter -> motor -> vehicle, battery on
the DC link, thermal network around everything) and hands it to the
scheduler; the energy report is a pure fold over the resulting trace.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .battery import BatteryComponent, BatteryParams
from .control import (ControllerComponent, ControllerRules, DeratingBand,
                      DriverComponent, DriverParams)
from .core import Connection, Trace, run, validate_graph
from .defaults import (default_battery_params, default_controller_rules,
                       default_inverter_params, default_motor_params,
                       default_thermal_network)
from .drive_cycle import CycleComponent, DriveCycle, load_drive_cycle
from .errors import ConfigError, ModelFormatError
from .inverter import InverterComponent, InverterParams
from .motor import MotorComponent, MotorParams
from .surrogate import SurrogateModel, check_ports, load_model
from .tables import Axis, GridTable
from .thermal import (ThermalComponent, ThermalEdge, ThermalNetwork,
                      ThermalNode, wrap_thermal_surrogate)
from .vehicle import VehicleComponent, VehicleParams, effective_inertia

# The powertrain topology is fixed; scenarios only choose the variant per
# component and declare which edges carry the one-step delay.
FORWARD_EDGES = (
    "cycle.v_target -> driver.v_target",
    "driver.torque_request -> controller.torque_request",
    "controller.t_cmd -> motor.t_cmd",
    "controller.mod_index -> inverter.mod_index",
    "controller.elec_freq -> inverter.elec_freq",
    "inverter.v_amp -> motor.v_amp",
    "inverter.freq -> motor.freq",
    "motor.omega -> vehicle.omega",
    "inverter.i_dc -> battery.i_dc",
)

CANONICAL_FEEDBACK = (
    "vehicle.v -> driver.v_actual",
    "motor.omega -> controller.omega",
    "motor.t_shaft -> controller.t_shaft",
    "battery.v_term -> controller.v_dc",
    "battery.max_discharge_a -> controller.max_discharge_a",
    "battery.max_charge_a -> controller.max_charge_a",
    "thermal.t_battery -> controller.t_battery",
    "thermal.t_inverter -> controller.t_inverter",
    "thermal.t_motor -> controller.t_motor",
    "battery.v_term -> inverter.v_dc",
    "motor.p_ac -> inverter.p_ac",
    "motor.omega -> inverter.speed",
    "motor.t_shaft -> inverter.torque",
    "vehicle.t_load -> motor.t_load",
    "battery.heat -> thermal.q_battery",
    "inverter.p_loss -> thermal.q_inverter",
    "motor.heat -> thermal.q_motor",
    "thermal.t_battery -> battery.cell_temp",
)

# algebraic-core port contracts for surrogate swaps
_BATTERY_CORE = ((("soc", "1"), ("i_dc", "A"), ("t_cell", "K")),
                 (("v_term", "V"),))
_INVERTER_CORE = ((("speed", "rad/s"), ("torque", "N*m")), (("eff", "1"),))
_MOTOR_CORE = ((("speed", "rad/s"), ("torque", "N*m")), (("loss_w", "W"),))


@dataclass
class ScenarioConfig:
    name: str
    dt: float
    duration: float
    cycle: DriveCycle
    initial_speed: float
    vehicle: VehicleParams
    driver: DriverParams
    rules: ControllerRules
    battery: BatteryParams
    inverter: InverterParams
    motor: MotorParams
    thermal: ThermalNetwork
    battery_model: SurrogateModel | None = None
    inverter_model: SurrogateModel | None = None
    motor_model: SurrogateModel | None = None
    thermal_models: list | None = None
    feedback: tuple[str, ...] = CANONICAL_FEEDBACK
    trace_path: str | None = None
    report_path: str | None = None


def parse_edge(text: str) -> Connection:
    """Parse 'component.port -> component.port'."""
    parts = [p.strip() for p in text.split("->")]
    if len(parts) != 2 or not all("." in p for p in parts):
        raise ConfigError(
            f"malformed edge {text!r}, expected 'comp.port -> comp.port'"
        )
    (sc, sp), (dc, dp) = (p.split(".", 1) for p in parts)
    return Connection(sc, sp, dc, dp)


# --- config reading helpers ----------------------------------------------


_MISSING = object()


def _check_keys(tbl, allowed, where):
    unknown = sorted(set(tbl) - set(allowed))
    if unknown:
        raise ConfigError(f"[{where}] unknown key(s): {', '.join(unknown)}")


def _num(tbl, key, where, default=_MISSING):
    v = tbl.get(key, default)
    if v is _MISSING:
        raise ConfigError(f"[{where}] missing required key {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{where}] {key} must be a number")
    return float(v)


def _floats(tbl, key, where):
    v = tbl.get(key)
    if not isinstance(v, list) or not v or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        raise ConfigError(f"[{where}] {key} must be a non-empty list of numbers")
    return [float(x) for x in v]


def _rows(tbl, key, where, n_rows, n_cols):
    v = tbl.get(key)
    if (not isinstance(v, list) or len(v) != n_rows
            or any(not isinstance(r, list) or len(r) != n_cols for r in v)):
        raise ConfigError(
            f"[{where}] {key} must be a {n_rows}x{n_cols} list of rows"
        )
    return [float(x) for r in v for x in r]


def _grid_1d(tbl, axis_key, unit, value_key, where):
    coords = _floats(tbl, axis_key, where)
    values = _floats(tbl, value_key, where)
    if len(values) != len(coords):
        raise ConfigError(
            f"[{where}] {value_key} length {len(values)} does not match "
            f"{axis_key} length {len(coords)}"
        )
    try:
        return GridTable([Axis(axis_key, unit, coords)], values)
    except ValueError as exc:
        raise ConfigError(f"[{where}] {exc}") from None


def _grid_2d(tbl, where, value_key, a_key="speed", a_unit="rad/s",
             b_key="torque", b_unit="N*m"):
    a = _floats(tbl, a_key, where)
    b = _floats(tbl, b_key, where)
    values = _rows(tbl, value_key, where, len(a), len(b))
    try:
        return GridTable([Axis(a_key, a_unit, a), Axis(b_key, b_unit, b)], values)
    except ValueError as exc:
        raise ConfigError(f"[{where}] {exc}") from None


def _map_from_section(tbl, where, value_key, base_dir):
    """Inline 2-D grid or `file = <model-exchange path>`."""
    if "file" in tbl:
        if len(tbl) != 1:
            raise ConfigError(f"[{where}] give either 'file' or an inline grid")
        model = load_model(os.path.join(base_dir, tbl["file"]))
        if model.kind != "table" or len(model.payload.axes) != 2:
            raise ConfigError(f"[{where}] {tbl['file']}: expected a 2-D table model")
        return model.payload
    _check_keys(tbl, ["speed", "torque", value_key], where)
    return _grid_2d(tbl, where, value_key)


def _variant(tbl, where):
    v = tbl.get("variant", "physics")
    if v not in ("physics", "surrogate"):
        raise ConfigError(f"[{where}] variant must be 'physics' or 'surrogate'")
    if v == "surrogate" and "model" not in tbl:
        raise ConfigError(f"[{where}] variant 'surrogate' needs a model path")
    return v


def _core_model(tbl, where, base_dir, contract):
    path = tbl["model"]
    model = load_model(os.path.join(base_dir, path))
    ins, outs = contract
    try:
        check_ports(model, ins, outs)
    except ModelFormatError as exc:
        raise ConfigError(f"[{where}] {path}: {exc}") from None
    return model


# --- section parsers ------------------------------------------------------


def _parse_battery(tbl, base_dir):
    where = "battery"
    _check_keys(tbl, ["variant", "model", "capacity_ah", "initial_soc",
                      "max_discharge_a", "max_charge_a", "soc_bounds",
                      "temp_warn_k", "temp_cutoff_k", "initial_temp_k",
                      "ocv", "r0", "rc"], where)
    variant = _variant(tbl, where)
    if "ocv" not in tbl or "r0" not in tbl:
        raise ConfigError("[battery] needs [battery.ocv] and [battery.r0] tables")
    ocv_tbl = tbl["ocv"]
    _check_keys(ocv_tbl, ["soc", "volts"], "battery.ocv")
    ocv = _grid_1d(ocv_tbl, "soc", "1", "volts", "battery.ocv")
    r0_tbl = tbl["r0"]
    _check_keys(r0_tbl, ["soc", "temp_k", "ohms"], "battery.r0")
    soc = _floats(r0_tbl, "soc", "battery.r0")
    temp = _floats(r0_tbl, "temp_k", "battery.r0")
    ohms = _rows(r0_tbl, "ohms", "battery.r0", len(soc), len(temp))
    try:
        r0 = GridTable([Axis("soc", "1", soc), Axis("temp_k", "K", temp)], ohms)
    except ValueError as exc:
        raise ConfigError(f"[battery.r0] {exc}") from None
    rc_pairs = []
    for k, rc in enumerate(tbl.get("rc", [])):
        loc = f"battery.rc[{k}]"
        _check_keys(rc, ["r_ohm", "c_farad"], loc)
        rc_pairs.append((_num(rc, "r_ohm", loc), _num(rc, "c_farad", loc)))
    bounds = tbl.get("soc_bounds", [0.05, 0.95])
    if not (isinstance(bounds, list) and len(bounds) == 2):
        raise ConfigError("[battery] soc_bounds must be [low, high]")
    try:
        params = BatteryParams(
            capacity_ah=_num(tbl, "capacity_ah", where),
            ocv_table=ocv,
            r0_table=r0,
            rc_pairs=tuple(rc_pairs),
            max_discharge_a=_num(tbl, "max_discharge_a", where, 600.0),
            max_charge_a=_num(tbl, "max_charge_a", where, 300.0),
            soc_bounds=(float(bounds[0]), float(bounds[1])),
            temp_warn_k=_num(tbl, "temp_warn_k", where, 318.15),
            temp_cutoff_k=_num(tbl, "temp_cutoff_k", where, 333.15),
            initial_soc=_num(tbl, "initial_soc", where, 0.9),
            initial_temp_k=_num(tbl, "initial_temp_k", where, 298.15),
        )
    except ValueError as exc:
        raise ConfigError(f"[battery] {exc}") from None
    model = _core_model(tbl, where, base_dir, _BATTERY_CORE) \
        if variant == "surrogate" else None
    return params, model


def _parse_inverter(tbl, base_dir):
    where = "inverter"
    _check_keys(tbl, ["variant", "model", "max_modulation", "efficiency_floor",
                      "accessory_power_w", "efficiency"], where)
    variant = _variant(tbl, where)
    if "efficiency" not in tbl:
        raise ConfigError("[inverter] needs an [inverter.efficiency] map")
    eff_map = _map_from_section(tbl["efficiency"], "inverter.efficiency",
                                "eff", base_dir)
    try:
        params = InverterParams(
            efficiency_map=eff_map,
            max_modulation=_num(tbl, "max_modulation", where, 1.0),
            efficiency_floor=_num(tbl, "efficiency_floor", where, 0.5),
            accessory_power_w=_num(tbl, "accessory_power_w", where, 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[inverter] {exc}") from None
    model = _core_model(tbl, where, base_dir, _INVERTER_CORE) \
        if variant == "surrogate" else None
    return params, model


def _parse_motor(tbl, base_dir):
    where = "motor"
    _check_keys(tbl, ["variant", "model", "t_max_nm", "base_speed", "p_max_w",
                      "rotor_inertia", "pole_pairs", "tau_s", "v_amp_rated",
                      "loss"], where)
    variant = _variant(tbl, where)
    if "loss" not in tbl:
        raise ConfigError("[motor] needs a [motor.loss] map")
    loss_map = _map_from_section(tbl["loss"], "motor.loss", "watts", base_dir)
    pole_pairs = tbl.get("pole_pairs", 4)
    if isinstance(pole_pairs, bool) or not isinstance(pole_pairs, int):
        raise ConfigError("[motor] pole_pairs must be an integer")
    try:
        params = MotorParams(
            t_max_nm=_num(tbl, "t_max_nm", where),
            base_speed=_num(tbl, "base_speed", where),
            p_max_w=_num(tbl, "p_max_w", where),
            loss_map=loss_map,
            rotor_inertia=_num(tbl, "rotor_inertia", where),
            pole_pairs=pole_pairs,
            tau_s=_num(tbl, "tau_s", where, 0.02),
            v_amp_rated=_num(tbl, "v_amp_rated", where, 195.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[motor] {exc}") from None
    model = _core_model(tbl, where, base_dir, _MOTOR_CORE) \
        if variant == "surrogate" else None
    return params, model


def _parse_thermal(tbl, base_dir):
    where = "thermal"
    _check_keys(tbl, ["variant", "model", "ambient_k", "coolant_k",
                      "node", "edge"], where)
    variant = _variant(tbl, where)
    nodes = []
    for k, n in enumerate(tbl.get("node", [])):
        loc = f"thermal.node[{k}]"
        _check_keys(n, ["id", "heat_capacity", "initial_k"], loc)
        if not isinstance(n.get("id"), str):
            raise ConfigError(f"[{loc}] missing id")
        try:
            nodes.append(ThermalNode(n["id"], _num(n, "heat_capacity", loc),
                                     _num(n, "initial_k", loc)))
        except ValueError as exc:
            raise ConfigError(f"[{loc}] {exc}") from None
    edges = []
    for k, e in enumerate(tbl.get("edge", [])):
        loc = f"thermal.edge[{k}]"
        _check_keys(e, ["a", "b", "conductance"], loc)
        if not (isinstance(e.get("a"), str) and isinstance(e.get("b"), str)):
            raise ConfigError(f"[{loc}] needs node ids a and b")
        try:
            edges.append(ThermalEdge(e["a"], e["b"], _num(e, "conductance", loc)))
        except ValueError as exc:
            raise ConfigError(f"[{loc}] {exc}") from None
    try:
        net = ThermalNetwork(nodes, edges,
                             ambient_k=_num(tbl, "ambient_k", where, 298.15),
                             coolant_k=_num(tbl, "coolant_k", where, 298.15))
    except ValueError as exc:
        raise ConfigError(f"[thermal] {exc}") from None
    models = None
    if variant == "surrogate":
        paths = tbl["model"]
        if isinstance(paths, str):
            paths = [paths]
        models = [load_model(os.path.join(base_dir, p)) for p in paths]
    return net, models


def _parse_controller(tbl):
    where = "controller"
    _check_keys(tbl, ["regen_enabled", "regen_torque_cap", "derating"], where)
    bands = {}
    for node, band in tbl.get("derating", {}).items():
        loc = f"controller.derating.{node}"
        _check_keys(band, ["warn_k", "cutoff_k"], loc)
        try:
            bands[node] = DeratingBand(_num(band, "warn_k", loc),
                                       _num(band, "cutoff_k", loc))
        except ValueError as exc:
            raise ConfigError(f"[{loc}] {exc}") from None
    enabled = tbl.get("regen_enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigError("[controller] regen_enabled must be a boolean")
    try:
        return ControllerRules(
            derating=bands,
            regen_enabled=enabled,
            regen_torque_cap=_num(tbl, "regen_torque_cap", where, 150.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[controller] {exc}") from None


def load_scenario(path) -> ScenarioConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML syntax error: {exc}") from None
    base_dir = os.path.dirname(os.path.abspath(path))
    _check_keys(doc, ["scenario", "vehicle", "driver", "controller", "battery",
                      "inverter", "motor", "thermal", "feedback", "output"],
                str(path))

    sc = doc.get("scenario", {})
    _check_keys(sc, ["name", "dt", "cycle", "duration", "initial_speed"],
                "scenario")
    if "cycle" not in sc:
        raise ConfigError("[scenario] missing cycle file")
    cycle = load_drive_cycle(os.path.join(base_dir, sc["cycle"]))
    dt = _num(sc, "dt", "scenario", 0.01)
    if dt <= 0:
        raise ConfigError("[scenario] dt must be positive")
    duration = _num(sc, "duration", "scenario", cycle.duration)
    steps = duration / dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps) or duration <= 0:
        raise ConfigError(
            f"[scenario] duration {duration} is not a positive multiple of dt {dt}"
        )

    try:
        vehicle = VehicleParams(
            mass_kg=_num(doc.get("vehicle", {}), "mass_kg", "vehicle", 1500.0),
            c_rr=_num(doc.get("vehicle", {}), "c_rr", "vehicle", 0.01),
            air_density=_num(doc.get("vehicle", {}), "air_density", "vehicle", 1.2),
            cd_a=_num(doc.get("vehicle", {}), "cd_a", "vehicle", 0.6),
            wheel_radius_m=_num(doc.get("vehicle", {}), "wheel_radius_m",
                                "vehicle", 0.3),
            gear_ratio=_num(doc.get("vehicle", {}), "gear_ratio", "vehicle", 8.0),
            driveline_eff=_num(doc.get("vehicle", {}), "driveline_eff",
                               "vehicle", 0.97),
            gravity=_num(doc.get("vehicle", {}), "gravity", "vehicle", 9.81),
            grade=_num(doc.get("vehicle", {}), "grade", "vehicle", 0.0),
        )
        _check_keys(doc.get("vehicle", {}),
                    ["mass_kg", "c_rr", "air_density", "cd_a", "wheel_radius_m",
                     "gear_ratio", "driveline_eff", "gravity", "grade"], "vehicle")
        drv = doc.get("driver", {})
        _check_keys(drv, ["kp", "ki", "torque_clamp", "integrator_clamp"], "driver")
        driver = DriverParams(
            kp=_num(drv, "kp", "driver", 80.0),
            ki=_num(drv, "ki", "driver", 15.0),
            torque_clamp=_num(drv, "torque_clamp", "driver", 250.0),
            integrator_clamp=_num(drv, "integrator_clamp", "driver", 120.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    rules = _parse_controller(doc["controller"]) if "controller" in doc \
        else default_controller_rules()
    battery, battery_model = (_parse_battery(doc["battery"], base_dir)
                              if "battery" in doc
                              else (default_battery_params(), None))
    inverter, inverter_model = (_parse_inverter(doc["inverter"], base_dir)
                                if "inverter" in doc
                                else (default_inverter_params(), None))
    motor, motor_model = (_parse_motor(doc["motor"], base_dir)
                          if "motor" in doc
                          else (default_motor_params(), None))
    thermal, thermal_models = (_parse_thermal(doc["thermal"], base_dir)
                               if "thermal" in doc
                               else (default_thermal_network(), None))

    feedback = CANONICAL_FEEDBACK
    if "feedback" in doc:
        _check_keys(doc["feedback"], ["edges"], "feedback")
        edges = doc["feedback"].get("edges")
        if not isinstance(edges, list) or not all(isinstance(e, str) for e in edges):
            raise ConfigError("[feedback] edges must be a list of strings")
        feedback = tuple(edges)

    out = doc.get("output", {})
    _check_keys(out, ["trace", "report"], "output")

    name = sc.get("name")
    if name is None:
        name = os.path.splitext(os.path.basename(str(path)))[0]

    return ScenarioConfig(
        name=name,
        dt=dt,
        duration=duration,
        cycle=cycle,
        initial_speed=_num(sc, "initial_speed", "scenario", 0.0),
        vehicle=vehicle,
        driver=driver,
        rules=rules,
        battery=battery,
        inverter=inverter,
        motor=motor,
        thermal=thermal,
        battery_model=battery_model,
        inverter_model=inverter_model,
        motor_model=motor_model,
        thermal_models=thermal_models,
        feedback=feedback,
        trace_path=(os.path.join(base_dir, out["trace"])
                    if "trace" in out else None),
        report_path=(os.path.join(base_dir, out["report"])
                     if "report" in out else None),
    )


# --- assembly and run -----------------------------------------------------


def build_system(cfg: ScenarioConfig):
    """(components, connections) for the configured variant mix."""
    battery_core = None
    if cfg.battery_model is not None:
        model = cfg.battery_model
        battery_core = lambda soc, i_dc, t_cell: model.predict((soc, i_dc, t_cell))[0]
    eff_source = None
    if cfg.inverter_model is not None:
        eff_model = cfg.inverter_model
        eff_source = lambda speed, torque: eff_model.predict((speed, torque))[0]
    loss_source = None
    if cfg.motor_model is not None:
        loss_model = cfg.motor_model
        loss_source = lambda speed, torque: loss_model.predict((speed, torque))[0]

    vp = cfg.vehicle
    omega0 = cfg.initial_speed * vp.gear_ratio / vp.wheel_radius_m
    j_eff = effective_inertia(vp, cfg.motor.rotor_inertia)

    if cfg.thermal_models is None:
        thermal = ThermalComponent("thermal", cfg.thermal)
        cfg.thermal.check_stability(cfg.dt)
    else:
        thermal = wrap_thermal_surrogate(cfg.thermal_models, cfg.thermal, "thermal")
    for r_ohm, c_farad in cfg.battery.rc_pairs:
        if not cfg.dt < r_ohm * c_farad:
            raise ConfigError(
                f"dt = {cfg.dt} s must be below the battery RC time constant "
                f"{r_ohm * c_farad:.6g} s"
            )

    components = [
        CycleComponent("cycle", cfg.cycle),
        DriverComponent("driver", cfg.driver),
        ControllerComponent("controller", cfg.rules, cfg.motor,
                            cfg.inverter.max_modulation, loss_source),
        InverterComponent("inverter", cfg.inverter, eff_source),
        MotorComponent("motor", cfg.motor, inertia=j_eff,
                       initial_omega=omega0, loss_source=loss_source),
        VehicleComponent("vehicle", cfg.vehicle, cfg.initial_speed),
        BatteryComponent("battery", cfg.battery, battery_core),
        thermal,
    ]
    connections = [parse_edge(e) for e in FORWARD_EDGES]
    for text in cfg.feedback:
        conn = parse_edge(text)
        connections.append(Connection(conn.src_component, conn.src_port,
                                      conn.dst_component, conn.dst_port,
                                      feedback=True))
    return components, connections


def run_scenario(cfg: ScenarioConfig):
    """Assemble, run, and fold the report: returns (Trace, report dict)."""
    components, connections = build_system(cfg)
    schedule = validate_graph(components, connections, cfg.dt)
    trace = run(schedule, duration=cfg.duration)
    return trace, energy_report(trace, cfg)


# --- energy report --------------------------------------------------------


def energy_report(trace: Trace, cfg: ScenarioConfig) -> dict:
    """Fold the trace into the energy report.

    Integrals are rectangle sums over the step rows, matching the discrete
    dynamics exactly; distance uses the trapezoid rule over the speed
    trace including the initial row.  The driveline sees the load energy
    t_load[k-1] * omega[k] (the one-step delay the motor actually saw), of
    which the fraction (1 - eta) dissipates and eta reaches the road.
    """
    dt = cfg.dt
    vp = cfg.vehicle
    col = {name: i for i, name in enumerate(trace.columns)}

    def c(name):
        return col[name]

    i_v = c("vehicle.v")
    i_vt = c("battery.v_term")
    i_idc = c("inverter.i_dc")
    i_ploss = c("inverter.p_loss")
    i_mheat = c("motor.heat")
    i_bheat = c("battery.heat")
    i_om = c("motor.omega")
    i_tl = c("vehicle.t_load")
    i_soc = c("battery.soc")
    i_viol = c("battery.soc_violation")
    i_tgt = c("cycle.v_target")
    temp_cols = {nid: c(f"thermal.t_{nid}") for nid in cfg.thermal.node_ids}

    e_term = e_dis = e_regen = 0.0
    e_inv = e_mot = e_batt = 0.0
    e_load = 0.0
    distance = 0.0
    peak = {nid: trace.rows[0][i] for nid, i in temp_cols.items()}
    soc_clamp_steps = 0
    first_clamp = None
    speed_err = 0.0

    prev = trace.rows[0]
    for k in range(1, len(trace.rows)):
        row = trace.rows[k]
        p_term = row[i_vt] * row[i_idc]
        e_term += p_term
        if p_term >= 0.0:
            e_dis += p_term
        else:
            e_regen -= p_term
        e_inv += row[i_ploss]
        e_mot += row[i_mheat]
        e_batt += row[i_bheat]
        e_load += prev[i_tl] * row[i_om]
        distance += 0.5 * (prev[i_v] + row[i_v])
        for nid, i in temp_cols.items():
            if row[i] > peak[nid]:
                peak[nid] = row[i]
        if row[i_viol] > 0.5:
            soc_clamp_steps += 1
            if first_clamp is None:
                first_clamp = trace.times[k]
        err = abs(row[i_v] - row[i_tgt])
        if err > speed_err:
            speed_err = err
        prev = row

    j_eff = effective_inertia(vp, cfg.motor.rotor_inertia)
    w0 = trace.rows[0][i_om]
    w1 = trace.rows[-1][i_om]
    delta_kin = 0.5 * j_eff * (w1 * w1 - w0 * w0)
    e_dl_loss = (1.0 - vp.driveline_eff) * e_load * dt
    e_mech = vp.driveline_eff * e_load * dt
    e_acc = cfg.inverter.accessory_power_w * (len(trace.rows) - 1) * dt
    e_term_j = e_term * dt
    balance = (e_inv * dt + e_mot * dt + e_dl_loss + e_mech + delta_kin + e_acc)
    residual = e_term_j - balance

    wh = 1.0 / 3600.0
    report = {
        "scenario": cfg.name,
        "duration_s": trace.times[-1],
        "dt_s": dt,
        "distance_m": distance * dt,
        "battery_energy_wh": e_term_j * wh,
        "battery_discharge_wh": e_dis * dt * wh,
        "battery_regen_wh": e_regen * dt * wh,
        "wh_per_km": (e_term_j * wh / (distance * dt / 1000.0)
                      if distance * dt >= 1.0 else None),
        "inverter_loss_wh": e_inv * dt * wh,
        "motor_loss_wh": e_mot * dt * wh,
        "driveline_loss_wh": e_dl_loss * wh,
        "battery_loss_wh": e_batt * dt * wh,
        "accessory_wh": e_acc * wh,
        "mech_net_wh": e_mech * wh,
        "delta_kinetic_wh": delta_kin * wh,
        "energy_residual_wh": residual * wh,
        "energy_residual_rel": (residual / e_term_j if e_term_j != 0.0 else 0.0),
        "soc_start": trace.rows[0][i_soc],
        "soc_end": trace.rows[-1][i_soc],
        "peak_temp_k": {nid: peak[nid] for nid in cfg.thermal.node_ids},
        "violations": {
            "soc_clamp_steps": soc_clamp_steps,
            "first_soc_clamp_s": first_clamp,
            "speed_error_max_mps": speed_err,
        },
    }
    return report


def report_text(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def write_report(report: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(report_text(report))
