"""Integrand families on (0, inf) and their singularity-safe evaluation.

Every kernel is a function of ``t`` built from ``t``, ``e^{-t}`` and (for some
families) ``e^{-st}``.  Near ``t = 0`` the direct formulas subtract nearly
equal quantities, so below the crossover point each family switches to a
power series with an explicit tail bound.

Internally kernels work on raw ``mpmath.libmp`` tuples; the public
``eval_*`` functions take and return :class:`~stirling_ramanujan.bigreal.Real`
and evaluate at the precision carried by ``t``.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Union

from mpmath.libmp import (
    from_int,
    from_rational,
    fone,
    fzero,
    mpf_add,
    mpf_cmp,
    mpf_div,
    mpf_exp,
    mpf_mul,
    mpf_neg,
    mpf_pos,
    mpf_pow_int,
    mpf_sub,
    round_up,
)

from .bigreal import RND, Real
from .errors import DomainError
from .exact import b_coeff, r_n

__all__ = [
    "Kind",
    "IntegrandSpec",
    "CompiledKernel",
    "compile_kernel",
    "eval_kernel",
    "eval_stirling_kernel",
    "eval_upsilon_kernel",
    "eval_frullani_kernel",
    "eval_zeta_kernel",
    "eval_malmsten_kernel",
    "eval_harmonic_kernel",
    "eval_generator_kernel",
    "tail_bound",
    "default_series_terms",
]

TWO_PI = 2 * math.pi
LN2 = math.log(2)
ZETA2 = math.pi**2 / 6

Param = Union[Fraction, Real]


class Kind(str, enum.Enum):
    STIRLING = "stirling_kernel"
    UPSILON = "upsilon_kernel"
    FRULLANI = "frullani"
    HARMONIC = "harmonic"
    ZETA = "zeta"
    MALMSTEN = "malmsten"
    GENERATOR = "generator"


def _as_param(s) -> Param:
    if isinstance(s, Real):
        return s
    if isinstance(s, float):
        # floats are exact binary rationals; keep them exact
        return Fraction(s)
    return Fraction(s)


def _param_float(s: Param) -> float:
    return float(s)


@dataclass(frozen=True)
class IntegrandSpec:
    """One integrand family with its parameters and branch settings.

    ``series_terms=None`` lets each precision pick the number of series terms
    from the tail bound.  An explicit value acts as a floor.
    """

    kind: Kind
    n: Optional[int] = None
    s: Optional[Param] = None
    crossover_t0: Fraction = Fraction(1)
    series_terms: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.s is not None:
            object.__setattr__(self, "s", _as_param(self.s))
        t0 = Fraction(self.crossover_t0)
        object.__setattr__(self, "crossover_t0", t0)
        if not 0 < t0 < Fraction(TWO_PI):
            raise DomainError(f"crossover_t0 must lie in (0, 2*pi), got {float(t0)}")
        if self.series_terms is not None and self.series_terms < 1:
            raise DomainError("series_terms must be positive")
        kind, n, s = self.kind, self.n, self.s
        if kind in (Kind.STIRLING, Kind.UPSILON):
            if n is None or n < -1:
                raise DomainError(f"{kind.value} requires n >= -1, got {n}")
        elif kind is Kind.FRULLANI:
            if n is None or n < 0:
                raise DomainError(f"frullani requires n >= 0, got {n}")
            if s is None or not s > 0:
                raise DomainError("frullani requires s > 0")
        elif kind is Kind.ZETA:
            if n is None or n < 2:
                raise DomainError(f"zeta kernel requires m >= 2, got {n}")
        elif kind is Kind.HARMONIC:
            if n is None or n < 1:
                raise DomainError(f"harmonic kernel requires n >= 1, got {n}")
        elif kind is Kind.MALMSTEN:
            if s is None or s < 0:
                raise DomainError("malmsten requires s >= 0")
        elif kind is Kind.GENERATOR:
            if s is None or s < 0:
                raise DomainError("generator requires s >= 0")

    # convenience constructors
    @classmethod
    def stirling(cls, n: int, **kw) -> "IntegrandSpec":
        return cls(Kind.STIRLING, n=n, **kw)

    @classmethod
    def upsilon(cls, n: int, **kw) -> "IntegrandSpec":
        return cls(Kind.UPSILON, n=n, **kw)

    @classmethod
    def frullani(cls, n: int, s, **kw) -> "IntegrandSpec":
        return cls(Kind.FRULLANI, n=n, s=s, **kw)

    @classmethod
    def zeta(cls, m: int, **kw) -> "IntegrandSpec":
        return cls(Kind.ZETA, n=m, **kw)

    @classmethod
    def harmonic(cls, n: int, **kw) -> "IntegrandSpec":
        return cls(Kind.HARMONIC, n=n, **kw)

    @classmethod
    def malmsten(cls, s, **kw) -> "IntegrandSpec":
        return cls(Kind.MALMSTEN, s=s, **kw)

    @classmethod
    def generator(cls, s, **kw) -> "IntegrandSpec":
        return cls(Kind.GENERATOR, s=s, **kw)

    def describe(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.n is not None:
            out["n"] = self.n
        if self.s is not None:
            out["s"] = str(self.s) if isinstance(self.s, Fraction) else self.s.to_sci(20)
        return out


# --------------------------------------------------------------------------
# raw helpers
# --------------------------------------------------------------------------


def _mpf_of(x: Param | int, prec: int):
    if isinstance(x, Real):
        return mpf_pos(x.mpf, prec, RND)
    q = Fraction(x)
    return from_rational(q.numerator, q.denominator, prec, RND)


def _horner(coeffs: list, t, prec: int):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = mpf_add(mpf_mul(acc, t, prec, RND), c, prec, RND)
    return acc


def _log2_abs(t) -> float:
    """log2 |t| for a nonzero raw mpf, without overflow."""
    sign, man, exp, bc = t
    return exp + bc  # within one bit, good enough for guard sizing


def default_series_terms(digits: float, t0: float) -> int:
    """Initial guess ``ceil(digits / log10(2*pi/t0)) + 10``."""
    return math.ceil(digits / math.log10(TWO_PI / t0)) + 10


def _b_series_terms(n: int, t0: float, prec: int, floor: int) -> int:
    """Smallest K with ``sum_{k>K} |b_k| t0^{k-n-1} < 2^-prec``.

    Uses ``|b_k| <= 2*zeta(2)/(2*pi)^(k+1)`` for ``k >= 0``.
    """
    digits = prec * math.log10(2)
    K = max(floor, default_series_terms(digits, t0), n + 2)
    ratio = t0 / TWO_PI
    base = math.log(2 * ZETA2 / TWO_PI) - (n + 1) * math.log(t0) - math.log1p(-ratio)
    target = -prec * LN2
    while base + (K + 1) * math.log(ratio) > target:
        K += 1
    return K


def _factorial_series_terms(x: float, offset: int, t0: float, prec: int, floor: int,
                            prefactor: float = 1.0) -> int:
    """Smallest K with ``prefactor * x^(K+1) t0^(K+1-offset) / (K+1)!`` (geometric tail) below 2^-prec.

    Covers series of the form ``sum_k c_k t^(k-offset)`` with ``|c_k| <= prefactor*x^k/k!``.
    """
    K = max(floor, offset + 1)
    target = -prec * LN2
    log_x = math.log(x) if x > 0 else -math.inf
    log_t0 = math.log(t0)
    while True:
        ratio = x * t0 / (K + 2)
        if ratio < 0.5:
            log_term = (
                math.log(prefactor)
                + (K + 1) * log_x
                + (K + 1 - offset) * log_t0
                - math.lgamma(K + 2)
                - math.log1p(-ratio)
            )
            if log_term < target:
                return K
        K += 1


# --------------------------------------------------------------------------
# compiled kernels
# --------------------------------------------------------------------------


class CompiledKernel:
    """A kernel specialised to one precision: coefficients converted once."""

    def __init__(self, spec: IntegrandSpec, prec: int):
        self.spec = spec
        self.prec = prec
        self.t0 = _mpf_of(spec.crossover_t0, prec)
        self.series_terms = 0
        self._series: Optional[Callable] = None
        self._direct: Callable
        builder = _BUILDERS[spec.kind]
        builder(self)

    def __call__(self, t):
        if self._series is not None and mpf_cmp(t, self.t0) < 0:
            return self._series(t)
        return self._direct(t)

    def series(self, t):
        if self._series is None:
            return self._direct(t)
        return self._series(t)

    def direct(self, t):
        return self._direct(t)


def _build_stirling(k: CompiledKernel, with_r: bool = True) -> None:
    spec, prec = k.spec, k.prec
    n = spec.n
    rn = r_n(n) if with_r else Fraction(0)
    t0f = float(spec.crossover_t0)
    K = _b_series_terms(n, t0f, prec, spec.series_terms or 0)
    k.series_terms = K
    exact = [b_coeff(j) for j in range(n + 1, K + 1)]
    exact[0] -= rn
    coeffs = [_mpf_of(c, prec) for c in exact]

    def series(t):
        return mpf_mul(_horner(coeffs, t, prec), mpf_exp(mpf_neg(t), prec, RND), prec, RND)

    # direct branch polynomial: t * (sum_{k=-1}^{n} b_k t^k + r_n t^{n+1})
    poly_exact = [b_coeff(j) for j in range(-1, n + 1)] + [rn]
    n_plus_1 = n + 1

    def direct(t):
        extra = 8
        lt = _log2_abs(t)
        if lt < 0:
            extra += int((n + 2) * -lt) + 1
        elif n >= 0:
            extra += int((n + 1) * lt) + 1
        wp = prec + extra
        poly = _horner([_mpf_of(c, wp) for c in poly_exact], t, wp)
        e = mpf_exp(mpf_neg(t), wp, RND)
        q = mpf_div(fone, mpf_sub(fone, e, wp, RND), wp, RND)
        bracket = mpf_sub(q, mpf_div(poly, t, wp, RND), wp, RND)
        out = mpf_mul(bracket, e, wp, RND)
        if n_plus_1:
            out = mpf_div(out, mpf_pow_int(t, n_plus_1, wp, RND), wp, RND)
        return mpf_pos(out, prec, RND)

    k._series, k._direct = series, direct


def _build_upsilon(k: CompiledKernel) -> None:
    _build_stirling(k, with_r=False)


def _build_frullani(k: CompiledKernel) -> None:
    spec, prec = k.spec, k.prec
    n, s = spec.n, spec.s
    sf = _param_float(s)
    t0f = float(spec.crossover_t0)
    K = _factorial_series_terms(sf, n + 1, t0f, prec, spec.series_terms or 0)
    k.series_terms = K
    if isinstance(s, Fraction):
        coeffs = [
            _mpf_of((-s) ** j / math.factorial(j), prec) for j in range(n + 1, K + 1)
        ]
    else:
        sm = _mpf_of(s, prec + 20)
        coeffs = [
            mpf_div(
                mpf_pow_int(mpf_neg(sm), j, prec + 20, RND),
                from_int(math.factorial(j)),
                prec,
                RND,
            )
            for j in range(n + 1, K + 1)
        ]

    def series(t):
        return mpf_mul(_horner(coeffs, t, prec), mpf_exp(mpf_neg(t), prec, RND), prec, RND)

    n_plus_1 = n + 1

    def direct(t):
        lt = _log2_abs(t)
        st = sf * math.ldexp(1.0, lt) if lt < 1000 else math.inf
        # largest partial-sum term (s t)^k / k!, k <= n
        if math.isfinite(st):
            big = max(math.log2(max(st, 1.0)) * j - math.lgamma(j + 1) / LN2
                      for j in range(n + 1))
        else:
            big = 0.0
        extra = 8 + int(max(0.0, big)) + (int((n + 1) * -lt) + 1 if lt < 0 else 0)
        wp = prec + extra
        sw = _mpf_of(s, wp)
        st_m = mpf_mul(sw, t, wp, RND)
        partial = _horner(
            [_mpf_of(Fraction((-1) ** j, math.factorial(j)), wp) for j in range(n + 1)],
            st_m,
            wp,
        )
        bracket = mpf_sub(mpf_exp(mpf_neg(st_m), wp, RND), partial, wp, RND)
        out = mpf_mul(bracket, mpf_exp(mpf_neg(t), wp, RND), wp, RND)
        out = mpf_div(out, mpf_pow_int(t, n_plus_1, wp, RND), wp, RND)
        return mpf_pos(out, prec, RND)

    k._series, k._direct = series, direct


def _expm1_over_t_coeffs(K: int, prec: int) -> list:
    """Coefficients of ``(1 - e^{-t})/t = sum_k (-1)^k t^k/(k+1)!``."""
    return [_mpf_of(Fraction((-1) ** j, math.factorial(j + 1)), prec) for j in range(K + 1)]


def _build_zeta(k: CompiledKernel) -> None:
    spec, prec = k.spec, k.prec
    m = spec.n
    t0f = float(spec.crossover_t0)
    K = _factorial_series_terms(1.0, 0, t0f, prec + 4, spec.series_terms or 0)
    k.series_terms = K
    dcoeffs = _expm1_over_t_coeffs(K, prec)

    def series(t):
        d = _horner(dcoeffs, t, prec)
        out = mpf_div(mpf_exp(mpf_neg(t), prec, RND), d, prec, RND)
        if m > 2:
            out = mpf_mul(out, mpf_pow_int(t, m - 2, prec, RND), prec, RND)
        return out

    def direct(t):
        lt = _log2_abs(t)
        wp = prec + 8 + (int(-lt) + 1 if lt < 0 else 0)
        e = mpf_exp(mpf_neg(t), wp, RND)
        num = mpf_mul(mpf_pow_int(t, m - 1, wp, RND), e, wp, RND)
        return mpf_div(num, mpf_sub(fone, e, wp, RND), prec, RND)

    k._series, k._direct = series, direct


def _build_malmsten(k: CompiledKernel) -> None:
    spec, prec = k.spec, k.prec
    s = spec.s
    sf = _param_float(s)
    t0f = float(spec.crossover_t0)
    x = max(1.0, sf)
    K = _factorial_series_terms(x, 2, t0f, prec + 4, spec.series_terms or 0, prefactor=2.0)
    k.series_terms = K
    # N(t)/t^2 with N(t) = s(1 - e^{-t}) - (1 - e^{-st}) = sum_{j>=2} (-1)^{j+1} (s - s^j) t^j / j!
    if isinstance(s, Fraction):
        ncoeffs = [
            _mpf_of((-1) ** (j + 1) * (s - s**j) / math.factorial(j), prec)
            for j in range(2, K + 1)
        ]
    else:
        wp0 = prec + 20
        sm = _mpf_of(s, wp0)
        ncoeffs = []
        for j in range(2, K + 1):
            diff = mpf_sub(sm, mpf_pow_int(sm, j, wp0, RND), wp0, RND)
            c = mpf_div(diff, from_int(math.factorial(j)), prec, RND)
            ncoeffs.append(c if j % 2 else mpf_neg(c))
    dcoeffs = _expm1_over_t_coeffs(K, prec)

    def series(t):
        num = _horner(ncoeffs, t, prec)
        d = _horner(dcoeffs, t, prec)
        return mpf_mul(mpf_div(num, d, prec, RND), mpf_exp(mpf_neg(t), prec, RND), prec, RND)

    def direct(t):
        lt = _log2_abs(t)
        extra = 8 + int(math.log2(x) + 1) + (int(-lt) + 1 if lt < 0 else 0)
        wp = prec + extra
        sw = _mpf_of(s, wp)
        e = mpf_exp(mpf_neg(t), wp, RND)
        est = mpf_exp(mpf_neg(mpf_mul(sw, t, wp, RND)), wp, RND)
        frac = mpf_div(mpf_sub(est, fone, wp, RND), mpf_sub(fone, e, wp, RND), wp, RND)
        bracket = mpf_add(sw, frac, wp, RND)
        return mpf_div(mpf_mul(bracket, e, wp, RND), t, prec, RND)

    k._series, k._direct = series, direct


def _build_harmonic(k: CompiledKernel) -> None:
    prec, n = k.prec, k.spec.n

    def direct(t):
        wp = prec + 8 + n.bit_length()
        e = mpf_exp(mpf_neg(t), wp, RND)
        acc, p = fzero, fone
        for _ in range(n):
            p = mpf_mul(p, e, wp, RND)
            acc = mpf_add(acc, p, wp, RND)
        return mpf_pos(acc, prec, RND)

    k._series, k._direct = None, direct


def _build_generator(k: CompiledKernel) -> None:
    prec, s = k.prec, k.spec.s
    s1 = _mpf_of(s + 1, prec + 8)

    def direct(t):
        return mpf_exp(mpf_neg(mpf_mul(s1, t, prec + 8, RND)), prec, RND)

    k._series, k._direct = None, direct


_BUILDERS = {
    Kind.STIRLING: _build_stirling,
    Kind.UPSILON: _build_upsilon,
    Kind.FRULLANI: _build_frullani,
    Kind.ZETA: _build_zeta,
    Kind.MALMSTEN: _build_malmsten,
    Kind.HARMONIC: _build_harmonic,
    Kind.GENERATOR: _build_generator,
}

_compile_lock = threading.Lock()


@lru_cache(maxsize=512)
def _compile_cached(spec: IntegrandSpec, prec: int) -> CompiledKernel:
    return CompiledKernel(spec, prec)


def compile_kernel(spec: IntegrandSpec, prec: int) -> CompiledKernel:
    """Kernel for ``spec`` at ``prec`` bits; cached and shareable across threads."""
    with _compile_lock:
        return _compile_cached(spec, prec)


# --------------------------------------------------------------------------
# public evaluation API
# --------------------------------------------------------------------------


def eval_kernel(spec: IntegrandSpec, t: Real, branch: Optional[str] = None) -> Real:
    """Evaluate ``spec`` at ``t`` with ``t.prec`` bits.

    ``branch`` may force ``"series"`` or ``"direct"``; by default the crossover
    point decides.
    """
    if t.sign() <= 0:
        raise DomainError(f"kernels are defined for t > 0, got {float(t)!r}")
    k = compile_kernel(spec, t.prec)
    if branch is None:
        raw = k(t.mpf)
    elif branch == "series":
        raw = k.series(t.mpf)
    elif branch == "direct":
        raw = k.direct(t.mpf)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return Real(raw, t.prec)


def eval_stirling_kernel(n: int, t: Real, **options) -> Real:
    """``(1/(1-e^-t) - sum_{k=-1}^n b_k t^k - r_n t^{n+1}) e^-t / t^{n+1}``."""
    branch = options.pop("branch", None)
    return eval_kernel(IntegrandSpec.stirling(n, **options), t, branch)


def eval_upsilon_kernel(n: int, t: Real, **options) -> Real:
    branch = options.pop("branch", None)
    return eval_kernel(IntegrandSpec.upsilon(n, **options), t, branch)


def eval_frullani_kernel(n: int, s, t: Real, **options) -> Real:
    branch = options.pop("branch", None)
    return eval_kernel(IntegrandSpec.frullani(n, s, **options), t, branch)


def eval_zeta_kernel(m: int, t: Real, **options) -> Real:
    branch = options.pop("branch", None)
    return eval_kernel(IntegrandSpec.zeta(m, **options), t, branch)


def eval_malmsten_kernel(s, t: Real, **options) -> Real:
    branch = options.pop("branch", None)
    return eval_kernel(IntegrandSpec.malmsten(s, **options), t, branch)


def eval_harmonic_kernel(n: int, t: Real) -> Real:
    return eval_kernel(IntegrandSpec.harmonic(n), t)


def eval_generator_kernel(s, t: Real) -> Real:
    return eval_kernel(IntegrandSpec.generator(s), t)


# --------------------------------------------------------------------------
# tail bounds
# --------------------------------------------------------------------------

_TAIL_PREC = 64
_SAFETY = 1 + 2.0**-30


def _log_tail(spec: IntegrandSpec, T: float) -> float:
    """Natural log of an upper bound for ``int_T^inf |kernel(t)| dt``."""
    kind, n = spec.kind, spec.n
    if kind in (Kind.STIRLING, Kind.UPSILON):
        C = 2.0 * T ** (-(n + 1))
        C += sum(abs(float(b_coeff(k))) * T ** (k - n - 1) for k in range(-1, n + 1))
        if kind is Kind.STIRLING:
            C += abs(float(r_n(n)))
        return math.log(C) - T
    if kind is Kind.FRULLANI:
        s = _param_float(spec.s)
        C = T ** (-(n + 1)) + sum(
            s**k * T ** (k - n - 1) / math.factorial(k) for k in range(n + 1)
        )
        return math.log(C) - T
    if kind is Kind.HARMONIC:
        return math.log(min(n, 2)) - T
    if kind is Kind.ZETA:
        m = n
        # Gamma(m, T) = e^-T sum_{j<m} (m-1)!/j! T^j, divided by (1 - e^-T)
        poly = sum(math.factorial(m - 1) / math.factorial(j) * T**j for j in range(m))
        return math.log(poly) - T - math.log1p(-math.exp(-T))
    if kind is Kind.MALMSTEN:
        s = _param_float(spec.s)
        return math.log((s + 2) / T) - T
    if kind is Kind.GENERATOR:
        s1 = _param_float(spec.s) + 1
        return -s1 * T - math.log(s1)
    raise AssertionError(kind)


def tail_bound(spec: IntegrandSpec, T) -> Real:
    """Upper bound on ``int_T^inf |kernel|`` for ``T >= max(crossover_t0, 1)``."""
    Tf = float(T)
    if Tf < max(float(spec.crossover_t0), 1.0):
        raise DomainError("tail bounds need T >= max(crossover_t0, 1)")
    log_b = _log_tail(spec, Tf)
    val = mpf_exp(_mpf_of(Fraction(log_b), _TAIL_PREC), _TAIL_PREC, round_up)
    val = mpf_mul(val, _mpf_of(Fraction(_SAFETY), _TAIL_PREC), _TAIL_PREC, round_up)
    return Real(val, _TAIL_PREC)

