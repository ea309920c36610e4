"""Euler-Maclaurin oracle for the Stirling-Ramanujan constants.

Independent of the integral formulas: S_n is read off partial sums of
``k^n log k`` (``n >= 0``) or ``k^n`` (``n <= -1``) after subtracting the
growing part of the asymptotic expansion and the Euler-Maclaurin correction
terms evaluated at the upper end only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from mpmath.libmp import from_int, fzero, mpf_add, mpf_log, mpf_mul

from .bigreal import RND, PrecisionPolicy, Real, bits_for_digits
from .exact import RPoly, bernoulli_number, harmonic

__all__ = [
    "EMDerivative",
    "AsymptoticExpansion",
    "em_derivative",
    "asymptotic_polys",
    "em_estimate",
    "em_estimate_power",
    "em_remainder_estimate",
    "choose_em_parameters",
]


@dataclass(frozen=True)
class EMDerivative:
    """``d^m/dx^m [x^n log x] = log_coeff x^power log x + plain_coeff x^power``."""

    n: int
    m: int
    log_coeff: Fraction
    plain_coeff: Fraction

    @property
    def power(self) -> int:
        return self.n - self.m


def em_derivative(n: int, m: int) -> EMDerivative:
    if n < 0 or m < 1:
        raise ValueError(f"em_derivative needs n >= 0 and m >= 1, got n={n}, m={m}")
    if m <= n:
        falling = Fraction(factorial(n), factorial(n - m))
        return EMDerivative(n, m, falling, falling * (harmonic(n) - harmonic(n - m)))
    plain = (-1) ** (m - n - 1) * factorial(n) * factorial(m - n - 1)
    return EMDerivative(n, m, Fraction(0), Fraction(plain))


def _em_weight(j: int) -> Fraction:
    return bernoulli_number(2 * j) / factorial(2 * j)


@dataclass(frozen=True)
class AsymptoticExpansion:
    """``sum_{k<=s} k^n log k = A(s) log s + B(s) + S_n + O(1/s)``.

    ``em_constant`` is the ``s^0`` part of the upper-end Euler-Maclaurin
    terms.  Being constant it belongs to S_n and is *not* subtracted; it is
    kept for inspection only; subtracting it would shift log A by 1/12.
    """

    n: int
    A: RPoly
    B: RPoly
    order_used: int
    em_constant: Fraction


def asymptotic_polys(n: int, J: int | None = None) -> AsymptoticExpansion:
    if n < 0:
        raise ValueError(f"asymptotic_polys needs n >= 0, got {n}")
    if J is None:
        J = (n + 2) // 2
    if 2 * J < n + 1:
        raise ValueError(f"J={J} too small for n={n}: need 2J >= n+1")
    A = {n + 1: Fraction(1, n + 1), n: Fraction(1, 2)}
    B = {n + 1: -Fraction(1, (n + 1) ** 2)}
    constant = Fraction(0)
    for j in range(1, J + 1):
        m = 2 * j - 1
        if m > n:
            break
        d = em_derivative(n, m)
        w = _em_weight(j)
        A[d.power] = A.get(d.power, Fraction(0)) + w * d.log_coeff
        if d.power == 0:
            constant += w * d.plain_coeff
        else:
            B[d.power] = B.get(d.power, Fraction(0)) + w * d.plain_coeff
    return AsymptoticExpansion(n, RPoly.from_terms(A), RPoly.from_terms(B), J, constant)


def _partial_sum_prec(n: int, s: int, policy: PrecisionPolicy) -> int:
    # the partial sum is ~ s^(n+1) log s while S_n is O(1)
    growth = (n + 1) * math.log10(s) + math.log10(max(math.log(s), 1.0))
    return bits_for_digits(policy.target_digits + policy.guard_digits + math.ceil(growth))


def em_estimate(n: int, s: int, J: int, policy: PrecisionPolicy) -> Real:
    """S_n from ``sum_{k=1}^s k^n log k`` with ``J`` Bernoulli corrections.

    Error is of order ``s^(n-2J-1)``.
    """
    if n < 0:
        raise ValueError("em_estimate is for n >= 0; use em_estimate_power for n <= -1")
    if s < 2:
        raise ValueError("s must be >= 2")
    if 2 * J + 1 <= n + 1:
        raise ValueError(f"J={J} too small for n={n}: remainder would not decay")
    prec = _partial_sum_prec(n, s, policy)
    total = fzero
    for k in range(2, s + 1):
        term = mpf_mul(from_int(k**n), mpf_log(from_int(k), prec, RND), prec, RND)
        total = mpf_add(total, term, prec, RND)
    expansion = asymptotic_polys(n, J)
    S = Real(total, prec)
    log_s = Real(mpf_log(from_int(s), prec, RND), prec)
    S = S - expansion.A(Fraction(s)) * log_s - expansion.B(Fraction(s))
    # decaying Euler-Maclaurin terms (m > n): plain_coeff * s^(n-m)
    decaying = Fraction(0)
    for j in range(1, J + 1):
        m = 2 * j - 1
        if m <= n:
            continue
        d = em_derivative(n, m)
        decaying += _em_weight(j) * d.plain_coeff * Fraction(s) ** d.power
    S = S - decaying
    return S.with_prec(policy.working_bits)


def em_estimate_power(n: int, s: int, J: int, policy: PrecisionPolicy) -> Real:
    """S_n for ``n <= -1`` from ``sum_{k=1}^s k^n``: gamma at n = -1, zeta(-n) below."""
    if n > -1:
        raise ValueError("em_estimate_power is for n <= -1")
    if s < 2 or J < 2:
        raise ValueError("need s >= 2 and J >= 2")
    prec = bits_for_digits(policy.target_digits + policy.guard_digits + 5)
    # exact partial sum, then one rounding
    partial = sum((Fraction(1, k ** (-n)) for k in range(1, s + 1)), Fraction(0))
    sq = Fraction(s)
    f_s = sq**n
    corr = f_s / 2
    for j in range(1, J + 1):
        m = 2 * j - 1
        # d^m/dx^m x^n = n (n-1) ... (n-m+1) x^(n-m)
        falling = math.prod(range(n - m + 1, n + 1))
        corr += _em_weight(j) * falling * sq ** (n - m)
    value = Real.from_fraction(partial - corr, prec)
    if n == -1:
        value = value - Real(mpf_log(from_int(s), prec, RND), prec)
    else:
        value = value - Fraction(1, n + 1) * sq ** (n + 1)
    return value.with_prec(policy.working_bits)


def em_remainder_estimate(n: int, s: int, J: int) -> float:
    """Size of the first omitted correction term (log10), used as the error bound.

    For these integrands the Euler-Maclaurin remainder is bounded by the first
    omitted term; the estimate is doubled for margin.
    """
    j = J + 1
    m = 2 * j - 1
    w = abs(_em_weight(j))
    log_w = math.log10(w.numerator) - math.log10(w.denominator)
    if n >= 0:
        if m > n:
            log_d = math.lgamma(n + 1) / math.log(10) + math.lgamma(m - n) / math.log(10)
            log_d += (n - m) * math.log10(s)
        else:
            log_d = math.lgamma(n + 1) / math.log(10) + (n - m) * math.log10(s) + math.log10(
                max(1.0, math.log(s)) + 2
            )
    else:
        log_d = math.lgamma(m - n) / math.log(10) - math.lgamma(-n) / math.log(10)
        log_d += (n - m) * math.log10(s)
    return log_w + log_d + math.log10(2)


def choose_em_parameters(n: int, digits: int, s: int | None = None) -> tuple[int, int]:
    """Pick ``(s, J)`` so the first omitted term is below ``10^-(digits+3)``.

    Starts from ``J = max(n, 0) + 8`` and raises ``J``; doubles ``s`` once the
    asymptotic terms stop shrinking.  The smallest term is about
    ``exp(-2 pi s)``, so ``s`` starts near ``digits / 2``.
    """
    if s is None:
        s = max(50, digits // 2)
    target = -(digits + 3)
    while True:
        J = max(n, 0) + 8
        best = em_remainder_estimate(n, s, J)
        while best > target:
            nxt = em_remainder_estimate(n, s, J + 1)
            if nxt >= best:
                break
            J += 1
            best = nxt
        if best <= target:
            return s, J
        s *= 2
