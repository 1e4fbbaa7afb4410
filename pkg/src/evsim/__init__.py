"""Fixed-step modular EV powertrain co-simulation.

Plant and control components (battery, inverter, motor, vehicle, thermal
network, driver, supervisory controller) run under a deterministic
sequential scheduler with declared one-step feedback edges.  Any plant's
algebraic core can be swapped for a surrogate (grid table or small dense
net) carried in a canonical model-exchange file, and scenarios, sweeps,
table fitting, validation, and batch runs are scriptable through the
`evsim` command.
"""

from .battery import BatteryComponent, BatteryParams, BatteryState, battery_limits, ocv, step_battery
from .control import (ControllerComponent, ControllerRules, DeratingBand,
                      DriverComponent, DriverParams, arbitrate, driver_step)
from .core import (Component, Connection, GraphError, PortSpec, Schedule,
                   SignalBus, StepError, Trace, initial_bus, initial_states,
                   run, step_system, validate_graph)
from .drive_cycle import CycleComponent, DriveCycle, load_drive_cycle, speed_at
from .errors import (ConfigError, CoverageError, EvsimError, ModelFormatError)
from .inverter import (InverterComponent, InverterParams, dc_side,
                       inverter_efficiency, synthesize_ac)
from .motor import MotorComponent, MotorParams, MotorState, step_motor, torque_capability
from .nets import DenseNet, Layer
from .scenario import (CANONICAL_FEEDBACK, FORWARD_EDGES, ScenarioConfig,
                       build_system, energy_report, load_scenario,
                       run_scenario, write_report)
from .surrogate import (PortTag, SurrogateModel, check_ports, dumps_model,
                        load_model, loads_model, save_model, table_model,
                        validate, wrap_component)
from .sweep import SweepGrid, load_grid, read_sweep_csv, run_sweep, write_sweep_csv
from .tables import Axis, FitResult, GridTable, fit_table
from .thermal import (ThermalComponent, ThermalEdge, ThermalNetwork,
                      ThermalNode, step_thermal, wrap_thermal_surrogate)
from .vehicle import (VehicleComponent, VehicleParams, effective_inertia,
                      load_torque, resistance_force, vehicle_step)

__version__ = "0.1.0"

__all__ = [
    "Axis", "BatteryComponent", "BatteryParams", "BatteryState",
    "CANONICAL_FEEDBACK", "Component", "ConfigError", "Connection",
    "ControllerComponent", "ControllerRules", "CoverageError",
    "CycleComponent", "DenseNet", "DeratingBand", "DriveCycle",
    "DriverComponent", "DriverParams", "EvsimError", "FORWARD_EDGES",
    "FitResult", "GraphError", "GridTable", "InverterComponent",
    "InverterParams", "Layer", "ModelFormatError", "MotorComponent",
    "MotorParams", "MotorState", "PortSpec", "PortTag", "ScenarioConfig",
    "Schedule", "SignalBus", "StepError", "SurrogateModel", "SweepGrid",
    "ThermalComponent", "ThermalEdge", "ThermalNetwork", "ThermalNode",
    "Trace", "VehicleComponent", "VehicleParams", "arbitrate",
    "battery_limits", "build_system", "check_ports", "dc_side",
    "driver_step", "dumps_model", "effective_inertia", "energy_report",
    "fit_table", "initial_bus", "initial_states", "inverter_efficiency",
    "load_drive_cycle", "load_grid", "load_model", "load_scenario",
    "load_torque", "loads_model", "ocv", "read_sweep_csv",
    "resistance_force", "run", "run_scenario", "run_sweep", "save_model",
    "speed_at", "step_battery", "step_motor", "step_system", "step_thermal",
    "synthesize_ac", "table_model", "torque_capability", "validate",
    "validate_graph", "vehicle_step", "wrap_component",
    "wrap_thermal_surrogate", "write_report", "write_sweep_csv",
]
