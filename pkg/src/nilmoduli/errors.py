"""Exception types shared across the package."""


class NilmoduliError(Exception):
    """Base class for all package errors."""


class ParseError(NilmoduliError):
    """Malformed Salamon notation string.

    Carries ``position`` = (token index, offset inside token), both 0-based,
    so callers can point at the offending character.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class SingularMatrix(NilmoduliError):
    """A matrix required to be invertible is (numerically) singular."""


class NotSPD(NilmoduliError):
    """A matrix required to be symmetric positive definite is not."""


class NotNilpotent(NilmoduliError):
    """Lower central series stabilizes at a nonzero subalgebra."""


class DegenerateParams(NilmoduliError):
    """Structured automorphism parameters violate a nondegeneracy condition."""


class Unsupported(NilmoduliError):
    """Operation is only defined for the built-in algebras."""


class AlgebraMismatch(NilmoduliError):
    """Objects tagged with different algebras were combined."""


class InvalidForm(NilmoduliError):
    """Canonical form parameters violate their range constraints."""


class InvalidTriple(NilmoduliError):
    """(a, b, c) is not on the unit sphere within tolerance."""


class InvalidParams(NilmoduliError):
    """Parameters outside the admissible range of a special family."""


class CanonicalizationFailed(NilmoduliError):
    """Certificate residual too large; carries the best residual achieved."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class Diverged(NilmoduliError):
    """Nonlinear least-squares residual became non-finite."""
