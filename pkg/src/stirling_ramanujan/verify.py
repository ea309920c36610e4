"""Numerical checks of the exponential-period identities.

Each check evaluates one side by certified quadrature and the other from a
closed form (exact rationals, ``log``, factorials) or from an independent
route, and reports instead of raising.  ``run_suite`` executes a fixed matrix;
passing a mutated :class:`Coefficients` shows that the relation checks are
sensitive to single-coefficient errors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Optional, Sequence

from .bigreal import PrecisionPolicy, Real, log_real, pi
from .constants import s_tilde, stirling_ramanujan, upsilon, zeta_integral
from .errors import NumericalFailure
from .exact import Coefficients, format_rational, harmonic
from .integrand import IntegrandSpec
from .quadrature import integrate_certified

__all__ = [
    "IdentityReport",
    "check_frullani",
    "check_generator",
    "check_harmonic_integral",
    "check_malmsten",
    "check_upsilon_relation",
    "check_s_tilde_relation",
    "check_shift_relation",
    "check_method_agreement",
    "check_zeta_closed_form",
    "check_zeta_em",
    "suite_matrix",
    "run_suite",
    "reports_to_json",
    "format_reports",
]

QUAD_EXTRA_DIGITS = 2


@dataclass(frozen=True)
class IdentityReport:
    identity: str
    params: dict
    lhs: Optional[Real]
    rhs: Optional[Real]
    abs_diff: Optional[Real]
    tolerance: Real
    passed: bool
    error: Optional[str] = None

    def to_dict(self, places: int = 30) -> dict:
        def dec(x: Optional[Real]) -> Optional[str]:
            return None if x is None else x.to_decimal(places)

        return {
            "identity": self.identity,
            "params": self.params,
            "lhs": dec(self.lhs),
            "rhs": dec(self.rhs),
            "abs_diff": None if self.abs_diff is None else self.abs_diff.to_sci(3),
            "tolerance": self.tolerance.to_sci(3),
            "pass": self.passed,
            "error": self.error,
        }


def _tolerance(digits: int) -> Real:
    return Real.from_fraction(Fraction(1, 10 ** max(0, digits - 3)), 64)


def _report(name: str, params: dict, lhs: Real, rhs: Real, digits: int) -> IdentityReport:
    tol = _tolerance(digits)
    diff = abs(lhs - rhs).with_prec(64)
    return IdentityReport(name, params, lhs, rhs, diff, tol, diff <= tol)


def _guarded(name: str, params: dict, digits: int, body: Callable[[], IdentityReport]) -> IdentityReport:
    # a numerical failure is a failed report, not an aborted suite
    try:
        return body()
    except NumericalFailure as exc:
        return IdentityReport(name, params, None, None, None, _tolerance(digits), False, f"{exc.code}: {exc}")


def _quad(spec: IntegrandSpec, digits: int, scale: int = 1) -> Real:
    extra = math.ceil(math.log10(scale)) if scale > 1 else 0
    return integrate_certified(spec, digits + QUAD_EXTRA_DIGITS + extra).value


def _param_str(s) -> str:
    return format_rational(s) if isinstance(s, (int, Fraction)) else s.to_sci(20)


# --------------------------------------------------------------------------
# exponential-period identities
# --------------------------------------------------------------------------


def check_frullani(n: int, s, digits: int) -> IdentityReport:
    """``(s+1)^n log(s+1)`` against its polynomial part plus the Frullani integral."""
    s = s if isinstance(s, Real) else Fraction(s)
    params = {"n": n, "s": _param_str(s)}

    def body() -> IdentityReport:
        policy = PrecisionPolicy(digits)
        prec = policy.working_bits
        s1 = (s + 1) if isinstance(s, Real) else Real.from_fraction(s + 1, prec)
        lhs = s1**n * log_real(s1.with_prec(prec))
        Hn = harmonic(n)
        poly = sum(
            (comb(n, k) * (Hn - harmonic(n - k)) * s**k for k in range(n + 1)),
            Fraction(0),
        )
        pref = (-1) ** (n + 1) * factorial(n)
        integral = _quad(IntegrandSpec.frullani(n, s), digits, factorial(n))
        rhs = integral * pref + poly
        return _report("frullani", params, lhs, rhs, digits)

    return _guarded("frullani", params, digits, body)


def check_generator(s, digits: int) -> IdentityReport:
    """``1/(s+1) = int e^{-(s+1) t} dt``."""
    s = s if isinstance(s, Real) else Fraction(s)
    params = {"s": _param_str(s)}

    def body() -> IdentityReport:
        prec = PrecisionPolicy(digits).working_bits
        one = Real.from_int(1, prec)
        lhs = one / (s + 1)
        rhs = _quad(IntegrandSpec.generator(s), digits)
        return _report("generator", params, lhs, rhs, digits)

    return _guarded("generator", params, digits, body)


def check_harmonic_integral(n: int, digits: int) -> IdentityReport:
    params = {"n": n}

    def body() -> IdentityReport:
        prec = PrecisionPolicy(digits).working_bits
        lhs = Real.from_fraction(harmonic(n), prec)
        rhs = _quad(IntegrandSpec.harmonic(n), digits)
        return _report("harmonic", params, lhs, rhs, digits)

    return _guarded("harmonic", params, digits, body)


def check_malmsten(s: int, digits: int) -> IdentityReport:
    """``log Gamma(s+1)`` at integer ``s``: the integral against ``log(s!)``."""
    params = {"s": s}

    def body() -> IdentityReport:
        prec = PrecisionPolicy(digits).working_bits
        lhs = log_real(Real.from_int(factorial(s), prec))
        rhs = _quad(IntegrandSpec.malmsten(s), digits)
        return _report("malmsten", params, lhs, rhs, digits)

    return _guarded("malmsten", params, digits, body)


# --------------------------------------------------------------------------
# relations between separately computed constants
# --------------------------------------------------------------------------


def check_upsilon_relation(n: int, digits: int, coeffs: Coefficients | None = None) -> IdentityReport:
    """``S_n = (-1)^(n+1) n! (Upsilon_n - r_n)`` with the two integrals run separately."""
    coeffs = coeffs or Coefficients()
    params = {"n": n}

    def body() -> IdentityReport:
        S = stirling_ramanujan(n, digits).value
        U = upsilon(n, digits + QUAD_EXTRA_DIGITS + math.ceil(math.log10(factorial(n)))).value
        rhs = (U - coeffs.r(n)) * ((-1) ** (n + 1) * factorial(n))
        return _report("upsilon_relation", params, S, rhs, digits)

    return _guarded("upsilon_relation", params, digits, body)


def check_s_tilde_relation(n: int, digits: int, coeffs: Coefficients | None = None) -> IdentityReport:
    """``S_n = S~_n + r^_n``."""
    coeffs = coeffs or Coefficients()
    params = {"n": n}

    def body() -> IdentityReport:
        S = stirling_ramanujan(n, digits).value
        rhs = s_tilde(n, digits).value + coeffs.r_hat(n)
        return _report("s_tilde_relation", params, S, rhs, digits)

    return _guarded("s_tilde_relation", params, digits, body)


def check_shift_relation(n: int, digits: int, coeffs: Coefficients | None = None) -> IdentityReport:
    """``S_n = S~_n + shift_correction(n)``, the constant built from the ``ã_j``."""
    coeffs = coeffs or Coefficients()
    params = {"n": n}

    def body() -> IdentityReport:
        S = stirling_ramanujan(n, digits).value
        rhs = s_tilde(n, digits).value + coeffs.shift_correction(n)
        return _report("shift_relation", params, S, rhs, digits)

    return _guarded("shift_relation", params, digits, body)


def check_method_agreement(n: int, digits: int) -> IdentityReport:
    """Integral ``S_n`` against the Euler-Maclaurin oracle."""
    params = {"n": n}

    def body() -> IdentityReport:
        a = stirling_ramanujan(n, digits, "integral").value
        b = stirling_ramanujan(n, digits, "euler_maclaurin").value
        return _report("method_agreement", params, a, b, digits)

    return _guarded("method_agreement", params, digits, body)


_ZETA_CLOSED = {2: (Fraction(1, 6), 2), 4: (Fraction(1, 90), 4)}


def check_zeta_closed_form(m: int, digits: int) -> IdentityReport:
    """``zeta(2) = pi^2/6``, ``zeta(4) = pi^4/90``."""
    if m not in _ZETA_CLOSED:
        raise ValueError(f"no closed form wired for zeta({m})")
    params = {"m": m}

    def body() -> IdentityReport:
        c, k = _ZETA_CLOSED[m]
        lhs = zeta_integral(m, digits).value
        rhs = pi(PrecisionPolicy(digits)) ** k * c
        return _report("zeta_closed_form", params, lhs, rhs, digits)

    return _guarded("zeta_closed_form", params, digits, body)


def check_zeta_em(m: int, digits: int) -> IdentityReport:
    params = {"m": m}

    def body() -> IdentityReport:
        lhs = zeta_integral(m, digits, "integral").value
        rhs = zeta_integral(m, digits, "euler_maclaurin").value
        return _report("zeta_em", params, lhs, rhs, digits)

    return _guarded("zeta_em", params, digits, body)


# --------------------------------------------------------------------------
# suite
# --------------------------------------------------------------------------

FRULLANI_N = range(0, 6)
FRULLANI_S = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(10))
GENERATOR_S = (0, 1, 9)
HARMONIC_N = (1, 4, 25)
MALMSTEN_S = (0, 1, 3, 10)
RELATION_N = range(0, 6)
AGREEMENT_N = range(-1, 6)
ZETA_M = (2, 3, 4)


def suite_matrix(digits: int, coeffs: Coefficients) -> list[Callable[[], IdentityReport]]:
    """The fixed, ordered list of checks run by :func:`run_suite`."""
    jobs: list[Callable[[], IdentityReport]] = []
    for n in FRULLANI_N:
        for s in FRULLANI_S:
            jobs.append(lambda n=n, s=s: check_frullani(n, s, digits))
    jobs += [lambda s=s: check_generator(s, digits) for s in GENERATOR_S]
    jobs += [lambda n=n: check_harmonic_integral(n, digits) for n in HARMONIC_N]
    jobs += [lambda s=s: check_malmsten(s, digits) for s in MALMSTEN_S]
    for n in RELATION_N:
        jobs.append(lambda n=n: check_upsilon_relation(n, digits, coeffs))
        jobs.append(lambda n=n: check_s_tilde_relation(n, digits, coeffs))
        jobs.append(lambda n=n: check_shift_relation(n, digits, coeffs))
    jobs += [lambda n=n: check_method_agreement(n, digits) for n in AGREEMENT_N]
    jobs += [lambda m=m: check_zeta_closed_form(m, digits) for m in _ZETA_CLOSED]
    jobs += [lambda m=m: check_zeta_em(m, digits) for m in ZETA_M]
    return jobs


def run_suite(digits: int = 25, coeffs: Coefficients | None = None) -> list[IdentityReport]:
    coeffs = coeffs or Coefficients()
    return [job() for job in suite_matrix(digits, coeffs)]


def reports_to_json(reports: Sequence[IdentityReport], places: int = 30) -> str:
    return json.dumps([r.to_dict(places) for r in reports], indent=2)


def format_reports(reports: Sequence[IdentityReport]) -> str:
    rows = [("identity", "params", "abs_diff", "tolerance", "result")]
    for r in reports:
        params = " ".join(f"{k}={v}" for k, v in r.params.items())
        diff = r.abs_diff.to_sci(3) if r.abs_diff is not None else (r.error or "-")
        rows.append((r.identity, params, diff, r.tolerance.to_sci(3), "pass" if r.passed else "FAIL"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines)
