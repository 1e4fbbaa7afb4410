"""Exception types shared across the simulator."""


class EvsimError(Exception):
    """Base class for all simulator-specific errors."""


class GraphError(EvsimError):
    """Component graph is invalid: bad wiring, port mismatch, algebraic loop."""


class ConfigError(EvsimError):
    """Scenario or parameter configuration is invalid."""


class ModelFormatError(EvsimError):
    """A model-exchange file violates the schema or its invariants."""


class CoverageError(EvsimError):
    """Table fitting found grid nodes with no supporting samples."""


class StepError(EvsimError):
    """A component produced an invalid result during simulation.

    Carries the offending component id, port name (when known) and the
    simulation time at which the step failed.
    """

    def __init__(self, message, component_id=None, port=None, time_s=None):
        super().__init__(message)
        self.component_id = component_id
        self.port = port
        self.time_s = time_s
