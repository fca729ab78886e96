"""Exception types shared across the package."""


class ObliqueVQEError(Exception):
    """Base class for all package errors."""


class InvalidInput(ObliqueVQEError):
    """Malformed numerical input (non-finite entries, bad shapes, bad files)."""


class IllConditionedMetric(ObliqueVQEError):
    """Gram matrix of a generalized eigenproblem is indefinite or nearly singular."""


class MajorizationError(ObliqueVQEError):
    """Squared-singular-value profile violates the majorization preconditions."""


class DegenerateColumn(ObliqueVQEError):
    """A column with zero norm cannot be retracted to the unit sphere."""


class ImaginaryResidue(ObliqueVQEError):
    """A quantity that must be real carries a non-negligible imaginary part."""


class InvalidWeights(ObliqueVQEError):
    """Weight vector is not strictly decreasing and positive."""


class InconsistentSpec(ObliqueVQEError):
    """Block specification cannot produce a stationary point."""


class MuTooSmall(ObliqueVQEError):
    """Penalty parameter below the |lambda_min| threshold."""


class AlreadyMinimal(ObliqueVQEError):
    """Escape requested at a point matching the minimizer characterization."""


class SpanError(ObliqueVQEError):
    """Reference vector lies in the span of the given columns."""


class DimensionMismatch(ObliqueVQEError):
    """Operands have incompatible qubit counts or shapes."""


class TooLarge(ObliqueVQEError):
    """Dense construction requested above the qubit cap."""


class LineSearchFailure(ObliqueVQEError):
    """Backtracking line search exhausted its budget."""


class NonFiniteObjective(ObliqueVQEError):
    """Objective returned NaN or infinity; carries the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
