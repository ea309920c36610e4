"""Error-controlled integration over (0, inf).

The half line is cut at ``T`` where the kernel's tail bound drops below a
quarter of the target; ``(0, T]`` is handled by tanh-sinh quadrature with
nested step halving.  Every kernel here is analytic on ``[0, T]`` (the nearest
singularities of ``1/(1 - e^{-t})`` sit at ``±2πi``), which is what the
double-exponential scheme needs.

Sums run in ascending node order so results are bit-reproducible.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from mpmath.libmp import (
    fone,
    from_int,
    from_rational,
    fzero,
    mpf_abs,
    mpf_add,
    mpf_cmp,
    mpf_cosh_sinh,
    mpf_div,
    mpf_exp,
    mpf_mul,
    mpf_pi,
    mpf_shift,
    mpf_sub,
)

from .bigreal import RND, PrecisionPolicy, Real
from .errors import CertificationFailed, NonConverged
from .integrand import IntegrandSpec, _log_tail, compile_kernel, tail_bound

__all__ = ["QuadResult", "integrate", "integrate_certified", "truncation_point"]

MAX_LEVEL = 20
MIN_LEVEL = 3
CERT_EXTRA_DIGITS = 15


@dataclass(frozen=True)
class QuadResult:
    value: Real
    error_estimate: Real
    nodes_used: int
    truncation_T: Fraction
    levels: int = 0


def truncation_point(spec: IntegrandSpec, log_target: float) -> int:
    """Smallest integer ``T >= max(t0, 1)`` with ``log(tail_bound(T)) <= log_target``.

    Works in log space because targets go far below the float range.
    """
    T = max(1, math.ceil(spec.crossover_t0))
    T = max(T, math.floor(-log_target) - 5)
    while _log_tail(spec, float(T)) > log_target:
        T += 1
    return T


# --------------------------------------------------------------------------
# tanh-sinh node tables on [0, 1]:  x = a or 1 - a,  a = 1/(1 + e^{2v}),
# v = (pi/2) sinh(k h); weight (per unit h) 2*pi*cosh(k h)*a*(1 - a) / 2.
# --------------------------------------------------------------------------

_table_lock = threading.Lock()


def _tau_max(prec: int) -> float:
    """Largest ``k h`` worth sampling: beyond it the weights fall below 2^-(prec+40)."""
    target = (prec + 40) * math.log(2)
    tau = 1.0
    while math.pi * math.sinh(tau) - math.log(2 * math.pi * math.cosh(tau)) < target:
        tau += 0.05
    return tau


@lru_cache(maxsize=64)
def _level_nodes(prec: int, level: int) -> tuple:
    """New nodes of ``level`` as ``(a, w)`` pairs (``k > 0``), ascending ``k``.

    Level 0 uses step 1 and all ``k >= 1``; level ``L`` uses step ``2^-L``
    and odd ``k`` only.  ``w`` already includes the ``1/2`` Jacobian of
    ``[-1, 1] -> [0, 1]`` but not the step.
    """
    wp = prec + 20
    tau = _tau_max(prec)
    pi_half = mpf_shift(mpf_pi(wp, RND), -1)
    two_pi = mpf_shift(mpf_pi(wp, RND), 1)
    out = []
    if level == 0:
        ks = range(1, int(tau) + 1)
        denom = 1
    else:
        denom = 1 << level
        ks = range(1, int(tau * denom) + 1, 2)
    for k in ks:
        kh = from_rational(k, denom, wp, RND)
        ch, sh = mpf_cosh_sinh(kh, wp, RND)
        v2 = mpf_shift(mpf_mul(pi_half, sh, wp, RND), 1)  # 2v
        e2v = mpf_exp(v2, wp, RND)
        a = mpf_div(fone, mpf_add(fone, e2v, wp, RND), wp, RND)
        one_minus_a = mpf_div(e2v, mpf_add(fone, e2v, wp, RND), wp, RND)
        w = mpf_mul(mpf_mul(two_pi, ch, wp, RND), mpf_mul(a, one_minus_a, wp, RND), wp, RND)
        w = mpf_shift(w, -1)
        out.append((a, one_minus_a, w))
    return tuple(out)


def _nodes(prec: int, level: int) -> tuple:
    with _table_lock:
        return _level_nodes(prec, level)


def integrate(
    spec: IntegrandSpec,
    target_abs_error,
    policy: Optional[PrecisionPolicy] = None,
    *,
    max_level: int = MAX_LEVEL,
) -> QuadResult:
    """Integrate ``spec`` over ``(0, inf)`` to absolute error ``target_abs_error``.

    Budget: tail ``<= target/4``, refinement difference ``<= target/4``; the
    remaining half is reserved for rounding.  ``error_estimate`` is the sum of
    the tail bound, the last refinement difference and a worst-case rounding
    bound.
    """
    target = Fraction(target_abs_error) if not isinstance(target_abs_error, Real) else target_abs_error
    if not target > 0:
        raise ValueError("target_abs_error must be positive")
    log_target = _log_of(target)
    if policy is None:
        policy = PrecisionPolicy(max(1, math.ceil(-log_target / math.log(10))) + 1)
    prec = policy.working_bits

    T = truncation_point(spec, log_target - math.log(4))
    tail = tail_bound(spec, T)
    kernel = compile_kernel(spec, prec)
    Tm = from_int(T)
    half_T = mpf_shift(Tm, -1)
    quarter_target = _mpf_of_target(target, prec) if not isinstance(target, Real) else target.mpf
    quarter_target = mpf_shift(quarter_target, -2)

    # centre node: x = 1/2, weight pi/2 * (1/2)
    center_w = mpf_shift(mpf_pi(prec, RND), -2)
    f_mid = kernel(half_T)
    acc = mpf_mul(center_w, f_mid, prec, RND)
    # sum of |w f| for the rounding bound
    acc_abs = mpf_abs(acc)
    nodes = 1
    prev = None
    for level in range(0, max_level + 1):
        level_sum = fzero
        level_abs = fzero
        for a, one_minus_a, w in _nodes(prec, level):
            lo = kernel(mpf_mul(Tm, a, prec, RND))
            hi = kernel(mpf_mul(Tm, one_minus_a, prec, RND))
            level_sum = mpf_add(level_sum, mpf_mul(w, mpf_add(lo, hi, prec, RND), prec, RND), prec, RND)
            level_abs = mpf_add(
                level_abs, mpf_mul(w, mpf_add(mpf_abs(lo), mpf_abs(hi), 64, RND), 64, RND), 64, RND
            )
            nodes += 2
        acc = mpf_add(acc, level_sum, prec, RND)
        acc_abs = mpf_add(acc_abs, level_abs, 64, RND)
        # I = T * h * acc with h = 2^-level
        estimate = mpf_shift(mpf_mul(Tm, acc, prec, RND), -level)
        if prev is not None:
            diff = mpf_abs(mpf_sub(estimate, prev, prec, RND))
            if level >= MIN_LEVEL and _le(diff, quarter_target):
                rounding = _rounding_bound(nodes, prec, mpf_shift(mpf_mul(Tm, acc_abs, 64, RND), -level))
                err = mpf_add(mpf_add(diff, tail.mpf, 64, RND), rounding, 64, RND)
                return QuadResult(Real(estimate, prec), Real(err, 64), nodes, Fraction(T), level)
        prev = estimate
    raise NonConverged(
        f"{spec.kind.value} did not converge after {max_level} refinements "
        f"(target {float(target):.3g}, {nodes} nodes)"
    )


def _rounding_bound(nodes: int, prec: int, abs_integral):
    """Worst-case accumulated rounding: a few ulps per kernel value plus
    one per addition, relative to ``sum |w f|``."""
    return mpf_shift(mpf_mul(from_int(4 * nodes), abs_integral, 64, RND), -prec)


def _le(a, b) -> bool:
    return mpf_cmp(a, b) <= 0


def _log_of(x) -> float:
    """Natural log of a positive Fraction or Real, safe far below float range."""
    if isinstance(x, Real):
        sign, man, exp, bc = x.mpf
        return math.log(man) + exp * math.log(2)
    return math.log(x.numerator) - math.log(x.denominator)


def _mpf_of_target(q: Fraction, prec: int):
    return from_rational(q.numerator, q.denominator, prec, RND)


@lru_cache(maxsize=1024)
def integrate_certified(spec: IntegrandSpec, target_digits: int) -> QuadResult:
    """Integrate at ``target_digits`` and again at ``target_digits + 15``.

    The two runs must agree to ``10^-target_digits``; the returned value is
    the finer run rounded to the coarse working precision.  Pure, hence
    memoised per ``(spec, target_digits)``.
    """
    if target_digits < 1:
        raise ValueError("target_digits must be >= 1")
    coarse_policy = PrecisionPolicy(target_digits)
    fine_policy = PrecisionPolicy(target_digits + CERT_EXTRA_DIGITS)
    coarse = integrate(spec, Fraction(1, 10**target_digits), coarse_policy)
    fine = integrate(spec, Fraction(1, 10 ** (target_digits + CERT_EXTRA_DIGITS)), fine_policy)
    gap = abs(coarse.value - fine.value)
    tol = Real.from_fraction(Fraction(1, 10**target_digits), 64)
    if gap > tol:
        raise CertificationFailed(
            f"{spec.kind.value}: runs at {target_digits} and "
            f"{target_digits + CERT_EXTRA_DIGITS} digits differ by {gap.to_sci()}"
        )
    prec = coarse_policy.working_bits
    value = fine.value.with_prec(prec)
    rounding = Real(mpf_shift(mpf_abs(value.mpf) if not value.is_zero() else fone, -prec), 64)
    err = fine.error_estimate + rounding
    return QuadResult(value, err.with_prec(64), fine.nodes_used, fine.truncation_T, fine.levels)
