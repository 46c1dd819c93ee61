"""Exception types shared across the package."""


class HankelFlowError(Exception):
    """Base class for all package errors."""


class ShapeError(HankelFlowError, ValueError):
    """Dimension mismatch between a vector, weight, or matrix and the Hankel geometry."""


class StructureError(HankelFlowError, ValueError):
    """A matrix that was required to be exactly Hankel is not."""


class NumericalError(HankelFlowError, RuntimeError):
    """A matrix decomposition failed; carries condition diagnostics in the message."""


class StagnationError(HankelFlowError, RuntimeError):
    """The step-size controller underflowed before reaching a stopping test.

    Carries the best state reached so far in ``state`` and the step trace in
    ``trace``.
    """

    def __init__(self, message, state=None, trace=None):
        super().__init__(message)
        self.state = state
        self.trace = trace


class InvalidModelError(HankelFlowError, ValueError):
    """A difference-equation coefficient vector is not usable for simulation."""


class DegeneratePolygonError(HankelFlowError, ValueError):
    """Polygon vertices are degenerate (repeated or adjacent-equal vertices)."""
