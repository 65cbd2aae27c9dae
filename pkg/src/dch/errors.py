"""Exception hierarchy shared across the package.

Two families matter for the CLI exit codes: `ValidationError` (and plain
ValueError) mean the input was malformed, `NumericalError` means the data
was structurally fine but a numerical contract failed (tolerance breach,
pole proximity, missing linear dependence).
"""


class ValidationError(ValueError):
    """Input data violates a structural contract."""


class NumericalError(ArithmeticError):
    """A numerical tolerance or well-posedness condition failed."""


class NotHolomorphicError(NumericalError):
    """Function fails the discrete Cauchy-Riemann residual check."""

    def __init__(self, max_residual, tol):
        self.max_residual = float(max_residual)
        self.tol = float(tol)
        super().__init__(
            f"function is not discretely holomorphic: max CR residual "
            f"{self.max_residual:.3e} exceeds tolerance {self.tol:.3e}"
        )


class BoundaryDataError(NumericalError):
    """Over-determined boundary data is inconsistent with holomorphy."""

    def __init__(self, residual, tol):
        self.residual = float(residual)
        self.tol = float(tol)
        super().__init__(
            f"boundary data inconsistent with a holomorphic extension: "
            f"residual {self.residual:.3e} exceeds {self.tol:.3e}"
        )


class PoleProximityError(NumericalError):
    """A rational exponential factor is evaluated too close to its pole."""

    def __init__(self, lam, direction, magnitude):
        self.lam = complex(lam)
        self.direction = complex(direction)
        self.magnitude = float(magnitude)
        super().__init__(
            f"exponential parameter {lam} is within {magnitude:.3e} of a pole "
            f"for edge direction {direction}"
        )


class RatioMismatchError(NumericalError):
    """Diagonal difference quotients disagree, so no face derivative exists."""

    def __init__(self, max_mismatch, tol):
        self.max_mismatch = float(max_mismatch)
        self.tol = float(tol)
        super().__init__(
            f"diagonal ratios disagree: max mismatch {self.max_mismatch:.3e} "
            f"exceeds {self.tol:.3e}; function is not holomorphic"
        )


class DependenceNotFoundError(NumericalError):
    """No linear dependence among monomials up to the requested degree."""

    def __init__(self, max_degree, best_ratio):
        self.max_degree = int(max_degree)
        self.best_ratio = float(best_ratio)
        super().__init__(
            f"no linear dependence among Z^{{:1:}}..Z^{{:{max_degree}:}} "
            f"(smallest relative singular value {best_ratio:.3e})"
        )


class ConvergenceDomainError(NumericalError):
    """Requested series or refinement leaves its validity domain."""
