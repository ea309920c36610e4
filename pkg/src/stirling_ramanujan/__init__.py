"""Stirling-Ramanujan constants computed as exponential periods.

Certified quadrature of regularized kernels, exact rational coefficients and
an independent Euler-Maclaurin oracle.
"""

from .bigreal import PrecisionPolicy, Real
from .constants import (
    ConstantRequest,
    ConstantResult,
    compute,
    constants_table,
    euler_gamma,
    glaisher_log,
    s_tilde,
    stirling_ramanujan,
    upsilon,
    zeta_integral,
)
from .errors import CertificationFailed, DomainError, NonConverged, NumericalFailure
from .exact import Coefficients, RPoly, b_coeff, bernoulli_number, r_hat, r_n
from .verify import run_suite

__all__ = [
    "PrecisionPolicy",
    "Real",
    "ConstantRequest",
    "ConstantResult",
    "compute",
    "constants_table",
    "euler_gamma",
    "glaisher_log",
    "s_tilde",
    "stirling_ramanujan",
    "upsilon",
    "zeta_integral",
    "CertificationFailed",
    "DomainError",
    "NonConverged",
    "NumericalFailure",
    "Coefficients",
    "RPoly",
    "b_coeff",
    "bernoulli_number",
    "r_hat",
    "r_n",
    "run_suite",
]

__version__ = "0.1.0"
