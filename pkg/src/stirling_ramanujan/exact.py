"""Exact rational combinatorics: Bernoulli-type coefficients, Faulhaber sums, r_n.

Everything here works over :class:`fractions.Fraction` and never rounds.

Sign convention: ``B_1 = -1/2`` (generating function ``t e^{st}/(e^t - 1)``).
All other quantities are written in terms of the Laurent coefficients ``b_k``
of ``1/(1 - e^{-t})``, so the convention only enters through :func:`b_coeff`.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Iterable, Mapping, Sequence, Union

__all__ = [
    "RPoly",
    "Coefficients",
    "bernoulli_number",
    "b_coeff",
    "b_poly",
    "faulhaber_poly",
    "harmonic",
    "r_n",
    "r_hat",
    "tilde_a",
    "shift_correction",
    "format_rational",
]

Number = Union[int, Fraction]


def format_rational(q: Number) -> str:
    """Render a rational as ``"p/q"`` (or ``"p"`` when integral)."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class RPoly:
    """Polynomial in one variable with exact rational coefficients.

    ``coeffs[i]`` is the coefficient of ``s**i``.  Trailing zeros are stripped
    so the zero polynomial has no coefficients and degree ``-1``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self._c: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def monomial(cls, degree: int, coeff: Number = 1) -> "RPoly":
        return cls([0] * degree + [coeff])

    @classmethod
    def from_terms(cls, terms: Mapping[int, Number]) -> "RPoly":
        if not terms:
            return cls()
        c = [Fraction(0)] * (max(terms) + 1)
        for deg, val in terms.items():
            if deg < 0:
                raise ValueError("negative degree in polynomial term")
            c[deg] += Fraction(val)
        return cls(c)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def coeff(self, i: int) -> Fraction:
        return self._c[i] if 0 <= i < len(self._c) else Fraction(0)

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        for c in reversed(self._c):
            acc = acc * x + c
        return acc

    def __add__(self, other) -> "RPoly":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        n = max(len(self._c), len(other._c))
        return RPoly(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "RPoly":
        return RPoly(-c for c in self._c)

    def __sub__(self, other) -> "RPoly":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RPoly":
        return (-self) + other

    def __mul__(self, other) -> "RPoly":
        if isinstance(other, (int, Fraction)):
            return RPoly(c * other for c in self._c)
        if not isinstance(other, RPoly):
            return NotImplemented
        if not self._c or not other._c:
            return RPoly()
        out = [Fraction(0)] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            if a:
                for j, b in enumerate(other._c):
                    out[i + j] += a * b
        return RPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self._c == other._c

    def __hash__(self) -> int:
        return hash(self._c)

    def __repr__(self) -> str:
        return f"RPoly([{', '.join(format_rational(c) for c in self._c)}])"

    def format(self, var: str = "s") -> str:
        """Descending-degree rendering, e.g. ``1/3 s^3 + 1/2 s^2 + 1/6 s``."""
        parts: list[str] = []
        for deg in range(len(self._c) - 1, -1, -1):
            c = self._c[deg]
            if c == 0:
                continue
            mag = abs(c)
            if deg == 0:
                body = format_rational(mag)
            else:
                mono = var if deg == 1 else f"{var}^{deg}"
                body = mono if mag == 1 else f"{format_rational(mag)} {mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts) if parts else "0"

    __str__ = format


def _as_poly(x):
    if isinstance(x, RPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return RPoly([x])
    return NotImplemented


# --------------------------------------------------------------------------
# Bernoulli numbers (shared, monotonically growing table)
# --------------------------------------------------------------------------

_tangent_table: list[int] = [0, 1]
_bernoulli_lock = threading.Lock()


def _tangent_numbers(n: int) -> list[int]:
    """Tangent numbers ``T_1..T_n`` (``tan x = sum T_k x^(2k-1)/(2k-1)!``).

    Integer-only in-place recurrence; far cheaper than the rational Bernoulli
    recurrence at large index.
    """
    T = [0] * (n + 1)
    T[1] = 1
    for k in range(2, n + 1):
        T[k] = (k - 1) * T[k - 1]
    for k in range(2, n + 1):
        for j in range(k, n + 1):
            T[j] = (j - k) * T[j - 1] + (j - k + 2) * T[j]
    return T


def bernoulli_number(k: int) -> Fraction:
    """Bernoulli number ``B_k`` with ``B_1 = -1/2``.

    Even indices come from tangent numbers,
    ``B_2m = (-1)^(m-1) 2m T_m / (4^m (4^m - 1))``; odd ``k >= 3`` vanish.
    The table only grows, under a lock.
    """
    global _tangent_table
    if k < 0:
        raise ValueError(f"Bernoulli index must be >= 0, got {k}")
    if k == 0:
        return Fraction(1)
    if k == 1:
        return Fraction(-1, 2)
    if k % 2:
        return Fraction(0)
    m = k // 2
    if m >= len(_tangent_table):
        with _bernoulli_lock:
            if m >= len(_tangent_table):
                _tangent_table = _tangent_numbers(max(m, 2 * (len(_tangent_table) - 1)))
    four_m = 4**m
    return Fraction((-1) ** (m - 1) * 2 * m * _tangent_table[m], four_m * (four_m - 1))


def b_coeff(k: int) -> Fraction:
    """Laurent coefficient ``b_k`` of ``1/(1 - e^{-t}) = sum_{k>=-1} b_k t^k``."""
    if k < -1:
        raise ValueError(f"b_k is defined for k >= -1, got {k}")
    if k == -1:
        return Fraction(1)
    sign = -1 if (k + 1) % 2 else 1
    return sign * bernoulli_number(k + 1) / factorial(k + 1)


BFunc = Callable[[int], Fraction]


def _b_poly(k: int, b: BFunc) -> RPoly:
    return RPoly(
        Fraction((-1) ** j) * b(k - j) / factorial(j) for j in range(k + 2)
    )


@lru_cache(maxsize=None)
def b_poly(k: int) -> RPoly:
    """``b_k(s) = sum_{j=0}^{k+1} (-1)^j b_{k-j} s^j / j!``; ``b_k(0) = b_k``."""
    if k < 0:
        raise ValueError(f"b_poly index must be >= 0, got {k}")
    return _b_poly(k, b_coeff)


@lru_cache(maxsize=None)
def faulhaber_poly(k: int) -> RPoly:
    """Polynomial ``P_k`` with ``P_k(s) = sum_{j=0}^{s-1} j^k`` for integers ``s >= 1``.

    ``0^0 = 1``, hence ``P_0(s) = s``.
    """
    if k < 0:
        raise ValueError(f"Faulhaber index must be >= 0, got {k}")
    scale = Fraction((-1) ** (k + 1) * factorial(k))
    terms = {
        j: scale * (-1) ** j * b_coeff(k - j) / factorial(j) for j in range(1, k + 2)
    }
    return RPoly.from_terms(terms)


@lru_cache(maxsize=None)
def harmonic(n: int) -> Fraction:
    """Harmonic number ``H_n`` with ``H_0 = 0``."""
    if n < 0:
        raise ValueError(f"harmonic number needs n >= 0, got {n}")
    if n == 0:
        return Fraction(0)
    return harmonic(n - 1) + Fraction(1, n)


# --------------------------------------------------------------------------
# r_n and its alternative forms.  The generic versions take the b-coefficient
# source as an argument so that mutated coefficient sets can be checked.
# --------------------------------------------------------------------------


def _r_n(n: int, b: BFunc) -> Fraction:
    return sum(
        (
            b(h) * (-1) ** (n - h + 1) / factorial(n - h) * harmonic(n - h)
            for h in range(-1, n)
        ),
        Fraction(0),
    )


def _r_hat(n: int, b: BFunc) -> Fraction:
    nf = factorial(n)
    total = Fraction(0)
    for j in range(1, n + 2):
        for h in range(-1, n - j + 1):
            total += (
                Fraction((-1) ** (j + h), j)
                * b(h)
                * Fraction(nf, factorial(n - h - j) * factorial(j))
            )
    return total


def _tilde_a(n: int, j: int, b: BFunc) -> Fraction:
    nf = factorial(n)
    return sum(
        (
            b(k) * (-1) ** (k + 1) * Fraction(nf, factorial(n - k - j) * factorial(j))
            for k in range(-1, n - j + 1)
        ),
        Fraction(0),
    )


def _shift_correction(n: int, tilde: Callable[[int, int], Fraction]) -> Fraction:
    return sum(
        (Fraction((-1) ** (k + 1), k) * tilde(n, k) for k in range(1, n + 2)),
        Fraction(0),
    )


@lru_cache(maxsize=None)
def r_n(n: int) -> Fraction:
    """``r_n = sum_{h=-1}^{n-1} b_h (-1)^{n-h+1} H_{n-h} / (n-h)!``; ``r_{-1} = 0``."""
    if n < -1:
        raise ValueError(f"r_n is defined for n >= -1, got {n}")
    return _r_n(n, b_coeff)


@lru_cache(maxsize=None)
def r_hat(n: int) -> Fraction:
    """Double-sum form; ``r_n = (-1)^n / n! * r_hat(n)``."""
    if n < 0:
        raise ValueError(f"r_hat is defined for n >= 0, got {n}")
    return _r_hat(n, b_coeff)


@lru_cache(maxsize=None)
def tilde_a(n: int, j: int) -> Fraction:
    """Coefficient of ``s^j`` in the shifted-base polynomial ``Ã_n(s)``."""
    if n < 0:
        raise ValueError(f"tilde_a needs n >= 0, got {n}")
    if not 0 <= j <= n + 1:
        raise ValueError(f"tilde_a index j must lie in [0, {n + 1}], got {j}")
    return _tilde_a(n, j, b_coeff)


@lru_cache(maxsize=None)
def shift_correction(n: int) -> Fraction:
    """Constant moving the ``log(s+1)`` expansion to the ``log s`` one."""
    if n < 0:
        raise ValueError(f"shift_correction needs n >= 0, got {n}")
    return _shift_correction(n, tilde_a)


class Coefficients:
    """Coefficient source used by identity checks.

    The default instance reproduces the module functions.  Overrides replace a
    single coefficient; derived quantities (r_n, r_hat, tilde_a, ...) are then
    recomputed from the overridden ``b`` values, which is what mutation tests
    rely on.
    """

    def __init__(
        self,
        b: Mapping[int, Number] | None = None,
        r: Mapping[int, Number] | None = None,
        tilde_a: Mapping[tuple[int, int], Number] | None = None,
    ):
        self._b_over = {k: Fraction(v) for k, v in (b or {}).items()}
        self._r_over = {k: Fraction(v) for k, v in (r or {}).items()}
        self._ta_over = {k: Fraction(v) for k, v in (tilde_a or {}).items()}

    @property
    def is_default(self) -> bool:
        return not (self._b_over or self._r_over or self._ta_over)

    def b(self, k: int) -> Fraction:
        if k in self._b_over:
            return self._b_over[k]
        return b_coeff(k)

    def r(self, n: int) -> Fraction:
        if n in self._r_over:
            return self._r_over[n]
        if self.is_default:
            return r_n(n)
        return _r_n(n, self.b)

    def r_hat(self, n: int) -> Fraction:
        if self.is_default:
            return r_hat(n)
        return _r_hat(n, self.b)

    def tilde_a(self, n: int, j: int) -> Fraction:
        if (n, j) in self._ta_over:
            return self._ta_over[(n, j)]
        if self.is_default:
            return tilde_a(n, j)
        return _tilde_a(n, j, self.b)

    def shift_correction(self, n: int) -> Fraction:
        if self.is_default:
            return shift_correction(n)
        return _shift_correction(n, self.tilde_a)

    @classmethod
    def perturbed(cls, target: str, index: Union[int, Sequence[int]], delta: Number):
        """One coefficient shifted by ``delta`` (target: ``b``, ``r`` or ``tilde_a``)."""
        delta = Fraction(delta)
        if target == "b":
            return cls(b={index: b_coeff(index) + delta})
        if target == "r":
            return cls(r={index: r_n(index) + delta})
        if target == "tilde_a":
            n, j = index
            return cls(tilde_a={(n, j): tilde_a(n, j) + delta})
        raise ValueError(f"unknown coefficient family {target!r}")
