"""Exception types shared across the package."""


class LevelprojError(Exception):
    """Base class for all levelproj errors."""


class InfeasibleConstraintError(LevelprojError):
    """The constraint level set is empty (or undetectably small).

    Raised when a point violates the constraint yet every subgradient
    vanishes, i.e. the point globally minimizes the constraint functional
    strictly above the bound.
    """


class DataFormatError(LevelprojError):
    """A data or graph file could not be parsed; message names the line."""


class NumericalError(LevelprojError):
    """Non-finite values or an internally inconsistent geometric state."""
