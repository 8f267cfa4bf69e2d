"""Exceptions shared across the library.

The CLI maps these onto exit codes: validation problems exit 2,
numeric non-convergence exits 3.
"""


class ValidationError(ValueError):
    """Bad parameters or malformed input data."""


class SizeCapError(ValidationError):
    """An exact algorithm was asked to run past its configured size cap."""


class PopulationCapError(RuntimeError):
    """A branching-process simulation exceeded its population cap.

    Carries the simulation time reached so callers can report how far
    the run got before being stopped.
    """

    def __init__(self, message: str, time_reached: float | None = None):
        super().__init__(message)
        self.time_reached = time_reached


class NonConvergenceError(RuntimeError):
    """An iterative solver failed to meet its tolerance within its budget."""
