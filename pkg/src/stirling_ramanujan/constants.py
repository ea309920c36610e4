"""Stirling-Ramanujan constants and their relatives, by two independent routes.

``integral``: certified quadrature of a regularized kernel, then an exact
rational prefactor.  ``euler_maclaurin``: partial sums with Bernoulli
corrections.  ``both`` runs the two and refuses to answer if they disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Optional

from mpmath.libmp import mpf_abs, mpf_shift

from .bigreal import PrecisionPolicy, Real
from .errors import CertificationFailed, DomainError
from .euler_maclaurin import (
    choose_em_parameters,
    em_estimate,
    em_estimate_power,
    em_remainder_estimate,
)
from .exact import format_rational, r_hat, r_n
from .integrand import IntegrandSpec
from .quadrature import integrate_certified

__all__ = [
    "KINDS",
    "METHODS",
    "ConstantRequest",
    "ConstantResult",
    "TableRow",
    "compute",
    "stirling_ramanujan",
    "upsilon",
    "s_tilde",
    "zeta_integral",
    "euler_gamma",
    "glaisher_log",
    "constants_table",
]

KINDS = ("S", "S_tilde", "Upsilon", "gamma", "glaisher_log", "zeta")
METHODS = ("integral", "euler_maclaurin", "both")
QUAD_EXTRA_DIGITS = 2


@dataclass(frozen=True)
class ConstantRequest:
    kind: str
    n: int
    digits: int
    method: str = "integral"
    crossover_t0: Fraction = Fraction(1)
    series_terms: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown constant kind {self.kind!r}; expected one of {KINDS}")
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.digits < 1:
            raise DomainError(f"digits must be positive, got {self.digits}")
        # gamma and log A pin n
        if self.kind == "gamma":
            object.__setattr__(self, "n", -1)
        elif self.kind == "glaisher_log":
            object.__setattr__(self, "n", 1)
        if self.kind in ("S", "S_tilde", "Upsilon") and self.n < -1:
            raise DomainError(f"{self.kind} requires n >= -1, got {self.n}")
        if self.kind == "zeta" and self.n < 2:
            raise DomainError(f"zeta requires m >= 2, got {self.n}")

    @property
    def key(self) -> str:
        return f"{self.kind}:{self.n}:{self.digits}:{self.method}"


@dataclass(frozen=True)
class ConstantResult:
    kind: str
    n: int
    digits: int
    method_used: str
    value: Real
    error_bound: Real
    provenance: dict = field(default_factory=dict)

    @property
    def decimal(self) -> str:
        return self.value.to_decimal(self.digits)

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "digits": self.digits,
            "method": self.method_used,
            "value": self.decimal,
            "error_bound": self.error_bound.to_sci(3),
            "nodes": self.provenance.get("nodes"),
            "truncation_T": self.provenance.get("truncation_T"),
        }


# --------------------------------------------------------------------------
# integral route
# --------------------------------------------------------------------------


def _signed_factorial(n: int) -> int:
    """``(-1)^(n+1) n!``, read as 1 at ``n = -1`` where the kernel is the gamma one."""
    if n < 0:
        return 1
    return (-1) ** (n + 1) * factorial(n)


def _integral_plan(req: ConstantRequest) -> tuple[IntegrandSpec, Fraction]:
    kw = {"crossover_t0": req.crossover_t0, "series_terms": req.series_terms}
    n = req.n
    if req.kind in ("S", "gamma", "glaisher_log"):
        return IntegrandSpec.stirling(n, **kw), Fraction(_signed_factorial(n))
    if req.kind == "Upsilon":
        return IntegrandSpec.upsilon(n, **kw), Fraction(1)
    if req.kind == "S_tilde":
        return IntegrandSpec.upsilon(n, **kw), Fraction(_signed_factorial(n))
    # zeta(m) (m-1)! is the integral
    return IntegrandSpec.zeta(n, **kw), Fraction(1, factorial(n - 1))


def _rounding_slack(value: Real) -> Real:
    if value.is_zero():
        return Real.zero(64)
    return Real(mpf_shift(mpf_abs(value.mpf), -value.prec + 1), 64)


def _integral(req: ConstantRequest) -> ConstantResult:
    spec, prefactor = _integral_plan(req)
    policy = PrecisionPolicy(req.digits)
    # the prefactor is applied after certification, so the quadrature target
    # absorbs its size
    scale = math.log10(abs(prefactor)) if prefactor else 0.0
    quad_digits = req.digits + QUAD_EXTRA_DIGITS + max(0, math.ceil(scale))
    q = integrate_certified(spec, quad_digits)
    value = (q.value * prefactor).with_prec(policy.working_bits)
    err = q.error_estimate * abs(prefactor) + _rounding_slack(value)
    prov = {
        "route": "integral",
        "kernel": spec.describe(),
        "prefactor": format_rational(prefactor),
        "quad_digits": quad_digits,
        "nodes": q.nodes_used,
        "truncation_T": format_rational(q.truncation_T),
        "levels": q.levels,
        "crossover_t0": format_rational(spec.crossover_t0),
    }
    return ConstantResult(req.kind, req.n, req.digits, "integral", value, err.with_prec(64), prov)


# --------------------------------------------------------------------------
# Euler-Maclaurin route; Upsilon and S_tilde follow from S_n by exact shifts
# --------------------------------------------------------------------------


def _em_stirling(n: int, digits: int) -> tuple[Real, Real, dict]:
    policy = PrecisionPolicy(digits)
    s, J = choose_em_parameters(n, digits)
    if n >= 0:
        value = em_estimate(n, s, J, policy)
    else:
        value = em_estimate_power(n, s, J, policy)
    log10_err = em_remainder_estimate(n, s, J)
    err = Real.from_fraction(Fraction(10) ** math.ceil(log10_err), 64) + _rounding_slack(value)
    return value, err, {"route": "euler_maclaurin", "s": s, "J": J}


def _euler_maclaurin(req: ConstantRequest) -> ConstantResult:
    n = req.n
    digits = req.digits
    policy = PrecisionPolicy(digits)
    if req.kind == "zeta":
        value, err, prov = _em_stirling(-n, digits)
    elif req.kind in ("S", "gamma", "glaisher_log"):
        value, err, prov = _em_stirling(n, digits)
    else:
        # carry a couple of extra digits through the exact shift
        sf = _signed_factorial(n)
        extra = math.ceil(math.log10(abs(sf))) + QUAD_EXTRA_DIGITS
        S, err, prov = _em_stirling(n, digits + extra)
        if req.kind == "Upsilon":
            value = S / sf + r_n(n)
            err = err / abs(sf)
        else:
            value = S - (r_hat(n) if n >= 0 else Fraction(0))
        value = value.with_prec(policy.working_bits)
        err = err + _rounding_slack(value)
    prov = dict(prov, nodes=None, truncation_T=None)
    return ConstantResult(
        req.kind, n, digits, "euler_maclaurin", value.with_prec(policy.working_bits),
        err.with_prec(64), prov,
    )


def _both(req: ConstantRequest) -> ConstantResult:
    a = _integral(req)
    b = _euler_maclaurin(req)
    diff = abs(a.value - b.value)
    allowed = a.error_bound + b.error_bound + Real.from_fraction(Fraction(1, 10**req.digits), 64)
    if diff > allowed:
        raise CertificationFailed(
            f"{req.kind}(n={req.n}): integral and Euler-Maclaurin values differ by "
            f"{diff.to_sci()} (allowed {allowed.to_sci()})"
        )
    prov = dict(a.provenance)
    prov["euler_maclaurin"] = {
        "value": b.decimal,
        "error_bound": b.error_bound.to_sci(3),
        "s": b.provenance["s"],
        "J": b.provenance["J"],
        "discrepancy": diff.to_sci(3),
    }
    return ConstantResult(req.kind, req.n, req.digits, "both", a.value, a.error_bound, prov)


_ROUTES = {"integral": _integral, "euler_maclaurin": _euler_maclaurin, "both": _both}


def compute(req: ConstantRequest) -> ConstantResult:
    return _ROUTES[req.method](req)


def stirling_ramanujan(n: int, digits: int, method: str = "integral", **kw) -> ConstantResult:
    """``S_n`` for ``n >= -1`` (``S_-1 = gamma``, ``S_0 = log(2 pi)/2``, ``S_1 = log A``)."""
    return compute(ConstantRequest("S", n, digits, method, **kw))


def upsilon(n: int, digits: int, method: str = "integral", **kw) -> ConstantResult:
    return compute(ConstantRequest("Upsilon", n, digits, method, **kw))


def s_tilde(n: int, digits: int, method: str = "integral", **kw) -> ConstantResult:
    return compute(ConstantRequest("S_tilde", n, digits, method, **kw))


def zeta_integral(m: int, digits: int, method: str = "integral", **kw) -> ConstantResult:
    return compute(ConstantRequest("zeta", m, digits, method, **kw))


def euler_gamma(digits: int, method: str = "integral") -> ConstantResult:
    return compute(ConstantRequest("gamma", -1, digits, method))


def glaisher_log(digits: int, method: str = "integral") -> ConstantResult:
    return compute(ConstantRequest("glaisher_log", 1, digits, method))


@dataclass(frozen=True)
class TableRow:
    n: int
    integral: ConstantResult
    euler_maclaurin: ConstantResult
    discrepancy: Real

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "integral": self.integral.decimal,
            "euler_maclaurin": self.euler_maclaurin.decimal,
            "discrepancy": self.discrepancy.to_sci(3),
            "nodes": self.integral.provenance["nodes"],
            "truncation_T": self.integral.provenance["truncation_T"],
        }


def constants_table(max_n: int, digits: int) -> list[TableRow]:
    """``S_n`` for ``n = -1..max_n`` by both routes, side by side."""
    if max_n < 0:
        raise DomainError(f"max_n must be >= 0, got {max_n}")
    rows = []
    for n in range(-1, max_n + 1):
        a = stirling_ramanujan(n, digits, "integral")
        b = stirling_ramanujan(n, digits, "euler_maclaurin")
        rows.append(TableRow(n, a, b, abs(a.value - b.value).with_prec(64)))
    return rows
