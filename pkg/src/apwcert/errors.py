"""Exception hierarchy.

Two families: ``ValidationError`` for bad inputs (CLI exit code 1) and
``NumericalError`` for failures of a computation on valid inputs (exit code 2).
Every error carries the name of the module that raised it.
"""


class ApwCertError(Exception):
    module = "apwcert"

    @property
    def identity(self):
        return f"{self.module}.{type(self).__name__}"


class ValidationError(ApwCertError, ValueError):
    pass


class NumericalError(ApwCertError, ArithmeticError):
    pass


class GeometryError(ValidationError):
    """A muffin-tin geometry violates one of the region assumptions."""

    module = "apw_basis"

    def __init__(self, message, assumption="(A')"):
        super().__init__(f"assumption {assumption} violated: {message}")
        self.assumption = assumption


class OutOfCell(ValidationError):
    module = "apw_basis"


class InvalidReciprocal(ValidationError):
    module = "secular"


class IncompatibleBasis(ValidationError):
    module = "secular"


class DomainError(ValidationError):
    module = "radial"


class GeometryUnsupported(ValidationError):
    module = "sobolev"


class ConfigError(ValidationError):
    module = "cli"


class NodeAtBoundary(NumericalError):
    """chi_l(R, E) vanishes to working precision."""

    module = "radial"

    def __init__(self, message, l=None, energy=None):
        super().__init__(message)
        self.l = l
        self.energy = energy


class RadialNodeAtR(NodeAtBoundary):
    """APW matching would divide by a vanishing chi_l(R, E)."""

    module = "apw_basis"


class NoBracket(NumericalError):
    module = "radial"

    def __init__(self, message, grid=None, values=None):
        super().__init__(message)
        self.grid = grid
        self.values = values


class SingularOverlap(NumericalError):
    module = "secular"

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class QuadratureBudgetExceeded(NumericalError):
    module = "secular"


class NotPositiveDefinite(NumericalError):
    module = "orthonorm"


class NoRealSolution(NumericalError):
    module = "experiments"


class ReferenceUnavailable(NumericalError):
    module = "certificate"
