"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericalFailure(ArithmeticError):
    """Base for failures of the numerical certification chain."""

    code = "NUMERICAL_FAILURE"


class NonConverged(NumericalFailure):
    """Quadrature refinement cap reached without meeting the target."""

    code = "NON_CONVERGED"


class CertificationFailed(NumericalFailure):
    """Two independent runs disagreed beyond the requested tolerance."""

    code = "CERTIFICATION_FAILED"
