"""Average-value inverter plant.

Fundamental-component model: no switching waveform, just the synthesized
phase amplitude, an efficiency map between AC and DC power, and the
resulting DC current load on the battery.  Loss |p_dc - p_ac| is reported
as heat.  An optional constant accessory draw rides on the DC link; it is
excluded from the reported inverter loss.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Component, PortSpec
from .errors import StepError
from .tables import GridTable


@dataclass(frozen=True)
class InverterParams:
    efficiency_map: GridTable  # 2-D (speed rad/s, torque N*m) -> fraction
    max_modulation: float = 1.0
    efficiency_floor: float = 0.5  # keeps p_dc = p_ac/eff bounded near zero power
    accessory_power_w: float = 0.0

    def __post_init__(self):
        if len(self.efficiency_map.axes) != 2:
            raise ValueError("efficiency_map must be 2-D over (speed, torque)")
        if not (0.0 < self.efficiency_map.min_value()
                and self.efficiency_map.max_value() <= 1.0):
            raise ValueError("efficiency values must lie in (0, 1]")
        if not self.max_modulation > 0:
            raise ValueError("max_modulation must be positive")
        if not 0.0 < self.efficiency_floor <= 1.0:
            raise ValueError("efficiency_floor must lie in (0, 1]")
        if self.accessory_power_w < 0:
            raise ValueError("accessory_power_w must be >= 0")


def synthesize_ac(v_dc, mod_index, elec_freq, max_modulation=1.0):
    """Phase amplitude and frequency from the DC link and the commands.

    Sinusoidal-PWM convention: v_amp = mod_index * v_dc / 2.
    """
    if not v_dc > 0:
        raise ValueError(f"v_dc must be positive, got {v_dc}")
    if not 0.0 <= mod_index <= max_modulation:
        raise ValueError(
            f"mod_index {mod_index} outside [0, {max_modulation}]"
        )
    return mod_index * v_dc / 2.0, elec_freq


def inverter_efficiency(params: InverterParams, speed, torque) -> float:
    """Bilinear map lookup (clamped outside the grid), floored."""
    eff = params.efficiency_map.eval((abs(speed), abs(torque)))
    return max(eff, params.efficiency_floor)


def dc_side(p_ac, eff, v_dc):
    """(p_dc, i_dc) from AC power through the efficiency.

    Motoring divides by the efficiency, regeneration multiplies, so losses
    dissipate in both directions; positive i_dc discharges the battery.
    """
    if not 0.0 < eff <= 1.0:
        raise ValueError(f"efficiency {eff} outside (0, 1]")
    if not v_dc > 0:
        raise ValueError(f"v_dc must be positive, got {v_dc}")
    p_dc = p_ac / eff if p_ac >= 0 else p_ac * eff
    return p_dc, p_dc / v_dc


class InverterComponent(Component):
    """Inverter plant component.

    The efficiency lookup uses the motor operating point fed back from the
    previous tick, matching the one-step delay on the AC power it converts.
    `eff_source(speed, torque) -> fraction`, when given, replaces the
    physics map (surrogate core swap); the floor still applies.
    """

    PORTS = [
        PortSpec("mod_index", "in", "1"),
        PortSpec("elec_freq", "in", "Hz"),
        PortSpec("v_dc", "in", "V"),
        PortSpec("p_ac", "in", "W"),
        PortSpec("speed", "in", "rad/s"),
        PortSpec("torque", "in", "N*m"),
        PortSpec("v_amp", "out", "V"),
        PortSpec("freq", "out", "Hz"),
        PortSpec("i_dc", "out", "A"),
        PortSpec("p_dc", "out", "W"),
        PortSpec("p_loss", "out", "W"),
    ]

    def __init__(self, component_id, params: InverterParams, eff_source=None):
        super().__init__(component_id, self.PORTS)
        self.params = params
        self._eff_source = eff_source

    def _efficiency(self, speed, torque):
        if self._eff_source is None:
            return inverter_efficiency(self.params, speed, torque)
        eff = self._eff_source(abs(speed), abs(torque))
        return max(eff, self.params.efficiency_floor)

    def initial_outputs(self, state):
        return {"v_amp": 0.0, "freq": 0.0, "i_dc": 0.0, "p_dc": 0.0, "p_loss": 0.0}

    def step(self, inputs, state, dt):
        p = self.params
        try:
            v_amp, freq = synthesize_ac(
                inputs["v_dc"], inputs["mod_index"], inputs["elec_freq"],
                p.max_modulation,
            )
            eff = self._efficiency(inputs["speed"], inputs["torque"])
            p_dc, i_dc = dc_side(inputs["p_ac"], eff, inputs["v_dc"])
        except ValueError as exc:
            raise StepError(str(exc), component_id=self.id) from None
        if p.accessory_power_w:
            i_dc += p.accessory_power_w / inputs["v_dc"]
        return {
            "v_amp": v_amp,
            "freq": freq,
            "i_dc": i_dc,
            "p_dc": p_dc,
            "p_loss": abs(p_dc - inputs["p_ac"]),
        }, state
