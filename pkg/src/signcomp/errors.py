"""Exception hierarchy.

Each family maps to one CLI exit code (see ``signcomp.cli``).
"""


class SignCompError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class PreconditionError(SignCompError, ValueError):
    """Input violates a documented precondition (shape, finiteness, bounds)."""

    exit_code = 4


class EmptyBasisError(PreconditionError):
    """An orthonormal basis was requested for the zero matrix."""


class CardinalityError(PreconditionError):
    """Requested more Schur independent columns than the dimension allows."""


class SamplingError(SignCompError):
    """Rejection sampling exhausted its draw budget."""

    exit_code = 5


class SolverError(SignCompError):
    """A numerical solver failed to reach its tolerance."""

    exit_code = 5


class InfeasibleError(SolverError):
    """The conic solver detected primal or dual infeasibility."""


class UnboundedPencilError(SolverError):
    """``max{z : zA + (1-z)X >= 0}`` has no finite maximizer."""


class HypothesisViolation(SignCompError):
    """The input does not satisfy the hypotheses under which the factorization
    is unique and computable; the carried ``residual`` (when known) measures
    by how much."""

    exit_code = 6

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ExtractionError(HypothesisViolation):
    """Could not extract a sign vector from a supposedly rank-one matrix."""


class StructureError(HypothesisViolation):
    """The intermediate sign decomposition lacks the expected +-e column."""


class SignResolutionError(HypothesisViolation):
    """The sign-resolution linear system is inconsistent or not +-1 valued."""


class MatrixParseError(SignCompError, ValueError):
    """A matrix file could not be parsed."""

    exit_code = 3

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
        self.line = line
        self.column = column
