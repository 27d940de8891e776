"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class InvalidInputError(SimulationError, ValueError):
    """An argument or input record violates a documented precondition."""


class NotFoundError(SimulationError, LookupError):
    """A referenced entity (vertex, edge, stop, request) does not exist."""


class ConfigurationError(SimulationError):
    """A scenario or network file is malformed or fails validation."""


class ConsistencyError(SimulationError):
    """Internal state violated an invariant; indicates a simulator bug."""
