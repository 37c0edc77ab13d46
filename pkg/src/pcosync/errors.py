"""Exception types shared across the package.

ValidationError covers bad inputs (graphs, configs, file formats) and maps
to CLI exit code 2.  SimulationError covers failures that can only be
detected while a run is in progress and maps to exit code 3.
"""


class ValidationError(ValueError):
    """Invalid argument, file content, or configuration."""


class SimulationError(RuntimeError):
    """A run could not be completed."""


class ZenoError(SimulationError):
    """Jump accumulation exceeded the admissible count for one period."""


class SequenceExhausted(SimulationError):
    """A deterministic trigger sequence ran out of masks mid-run."""
