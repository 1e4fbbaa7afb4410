"""Equivalent-circuit battery plant.

Voltage source behind a series resistance with an optional first-order RC
branch.  Sign convention: positive current discharges the pack.  The
algebraic terminal-voltage core can be swapped for a surrogate while SOC
integration and limit logic stay in this shell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Component, PortSpec
from .errors import StepError
from .tables import GridTable

# relative slack on the configured current limits so a command sitting
# exactly on the limit does not trip on float noise
_LIMIT_SLACK = 1e-6


@dataclass(frozen=True)
class BatteryParams:
    capacity_ah: float
    ocv_table: GridTable  # 1-D soc -> pack volts
    r0_table: GridTable  # 2-D (soc, temp K) -> ohms
    rc_pairs: tuple[tuple[float, float], ...] = ()  # (r ohm, c farad), 0 or 1
    max_discharge_a: float = 600.0
    max_charge_a: float = 300.0
    soc_bounds: tuple[float, float] = (0.05, 0.95)
    temp_warn_k: float = 318.15
    temp_cutoff_k: float = 333.15
    initial_soc: float = 0.9
    initial_temp_k: float = 298.15

    def __post_init__(self):
        if not self.capacity_ah > 0:
            raise ValueError("capacity_ah must be positive")
        if len(self.ocv_table.axes) != 1:
            raise ValueError("ocv_table must be 1-D over soc")
        lo, hi = self.ocv_table.axes[0].coords[0], self.ocv_table.axes[0].coords[-1]
        if lo < 0.0 or hi > 1.0:
            raise ValueError("ocv_table soc axis must lie within [0, 1]")
        vals = self.ocv_table.values
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("ocv_table must be strictly increasing in soc")
        if len(self.r0_table.axes) != 2:
            raise ValueError("r0_table must be 2-D over (soc, temp)")
        if not self.r0_table.min_value() > 0:
            raise ValueError("r0_table resistances must be positive")
        for k, (r, c) in enumerate(self.rc_pairs):
            if not (r > 0 and c > 0):
                raise ValueError(f"rc pair {k}: resistance and capacitance must be positive")
        if len(self.rc_pairs) > 1:
            raise ValueError("at most one RC pair is supported")
        b_lo, b_hi = self.soc_bounds
        if not (0.0 <= b_lo < b_hi <= 1.0):
            raise ValueError(f"soc_bounds {self.soc_bounds} must satisfy 0 <= lo < hi <= 1")
        if not (self.max_discharge_a > 0 and self.max_charge_a >= 0):
            raise ValueError("current limits must be positive (charge limit may be 0)")
        if not self.temp_warn_k < self.temp_cutoff_k:
            raise ValueError("temp_warn_k must be below temp_cutoff_k")
        if not b_lo <= self.initial_soc <= b_hi:
            raise ValueError("initial_soc must lie within soc_bounds")


@dataclass(frozen=True)
class BatteryState:
    soc: float
    rc_voltage: tuple[float, ...] = ()
    clamped: bool = False  # set when the last step hit an soc bound


def ocv(params: BatteryParams, soc: float) -> float:
    """Open-circuit pack voltage, piecewise linear in SOC."""
    if not 0.0 <= soc <= 1.0:
        raise ValueError(f"soc {soc} outside [0, 1]")
    return params.ocv_table.eval((soc,))


def _check_current(params: BatteryParams, i_dc: float) -> None:
    limit = params.max_discharge_a if i_dc >= 0 else params.max_charge_a
    if abs(i_dc) > limit * (1.0 + _LIMIT_SLACK):
        raise StepError(
            f"battery current {i_dc:.3f} A exceeds the configured "
            f"{'discharge' if i_dc >= 0 else 'charge'} limit {limit:.3f} A "
            "(controller or limits bug)"
        )


def _integrate_soc(params: BatteryParams, soc: float, i_dc: float, dt: float):
    raw = soc - i_dc * dt / (3600.0 * params.capacity_ah)
    lo, hi = params.soc_bounds
    clamped = min(max(raw, lo), hi)
    return clamped, clamped != raw


def step_battery(params, state, i_dc, dt, cell_temp):
    """One explicit step of the equivalent circuit.

    Returns (state', terminal_v, heat).  Terminal voltage and heat use the
    incoming RC state; RC branches and SOC integrate afterwards.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    _check_current(params, i_dc)
    r0 = params.r0_table.eval((state.soc, cell_temp))
    terminal_v = ocv(params, state.soc) - i_dc * r0 - sum(state.rc_voltage)
    heat = i_dc * i_dc * r0
    rc_next = []
    for (r, c), u in zip(params.rc_pairs, state.rc_voltage):
        heat += u * u / r
        rc_next.append(u + dt * (i_dc / c - u / (r * c)))
    soc, clamped = _integrate_soc(params, state.soc, i_dc, dt)
    return BatteryState(soc, tuple(rc_next), clamped), terminal_v, heat


def battery_limits(params, state, cell_temp):
    """(max discharge A, max charge A) after thermal and SOC derating.

    The thermal factor falls linearly from 1 at temp_warn_k to 0 at
    temp_cutoff_k.  Discharge is cut to zero at the lower SOC bound and
    charge at the upper one.
    """
    if cell_temp <= params.temp_warn_k:
        factor = 1.0
    elif cell_temp >= params.temp_cutoff_k:
        factor = 0.0
    else:
        factor = (params.temp_cutoff_k - cell_temp) / (
            params.temp_cutoff_k - params.temp_warn_k
        )
    lo, hi = params.soc_bounds
    discharge = 0.0 if state.soc <= lo else params.max_discharge_a * factor
    charge = 0.0 if state.soc >= hi else params.max_charge_a * factor
    return discharge, charge


class BatteryComponent(Component):
    """Battery plant component.

    `core`, when given, replaces the algebraic terminal-voltage map with a
    callable (soc, i_dc, cell_temp K) -> volts; SOC integration, limits,
    and derating remain here.  The surrogate path is quasi-static (no RC
    branch) and derives heat from the core's own zero-current voltage:
    heat = i * (v(soc, 0, T) - v(soc, i, T)).
    """

    PORTS = [
        PortSpec("i_dc", "in", "A"),
        PortSpec("cell_temp", "in", "K"),
        PortSpec("v_term", "out", "V"),
        PortSpec("soc", "out", "1"),
        PortSpec("heat", "out", "W"),
        PortSpec("max_discharge_a", "out", "A"),
        PortSpec("max_charge_a", "out", "A"),
        PortSpec("soc_violation", "out", "1"),
    ]

    def __init__(self, component_id, params: BatteryParams, core=None):
        super().__init__(component_id, self.PORTS)
        self.params = params
        self._core = core

    def initial_state(self):
        return BatteryState(
            self.params.initial_soc, (0.0,) * len(self.params.rc_pairs)
        )

    def _outputs(self, state, terminal_v, heat, cell_temp):
        discharge, charge = battery_limits(self.params, state, cell_temp)
        return {
            "v_term": terminal_v,
            "soc": state.soc,
            "heat": heat,
            "max_discharge_a": discharge,
            "max_charge_a": charge,
            "soc_violation": 1.0 if state.clamped else 0.0,
        }

    def initial_outputs(self, state):
        temp = self.params.initial_temp_k
        if self._core is None:
            v = ocv(self.params, state.soc)
        else:
            v = self._core(state.soc, 0.0, temp)
        return self._outputs(state, v, 0.0, temp)

    def step(self, inputs, state, dt):
        i_dc = inputs["i_dc"]
        temp = inputs["cell_temp"]
        if self._core is None:
            state, v, heat = step_battery(self.params, state, i_dc, dt, temp)
        else:
            _check_current(self.params, i_dc)
            v = self._core(state.soc, i_dc, temp)
            v_open = self._core(state.soc, 0.0, temp)
            heat = max(i_dc * (v_open - v), 0.0)
            soc, clamped = _integrate_soc(self.params, state.soc, i_dc, dt)
            state = BatteryState(soc, (), clamped)
        return self._outputs(state, v, heat, temp), state
