"""Arbitrary-precision reals with explicit precision.

Backed by ``mpmath.libmp`` raw mpf tuples: every operation takes its precision
as an argument, so nothing depends on mpmath's global context.  Values are
immutable and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from mpmath import libmp
from mpmath.libmp import (
    from_int,
    from_rational,
    fzero,
    mpf_abs,
    mpf_add,
    mpf_cmp,
    mpf_div,
    mpf_exp,
    mpf_log,
    mpf_mul,
    mpf_neg,
    mpf_pi,
    mpf_sub,
    to_float,
    to_int,
)

from .errors import DomainError

__all__ = [
    "PrecisionPolicy",
    "Real",
    "real_from_rational",
    "exp_real",
    "log_real",
    "pi",
    "bits_for_digits",
]

RND = libmp.round_nearest
LOG2_10 = math.log2(10)
MIN_GUARD_DIGITS = 10


def bits_for_digits(digits: float) -> int:
    return int(math.ceil(digits * LOG2_10))


@dataclass(frozen=True)
class PrecisionPolicy:
    """Decimal target plus guard digits; ``working_bits`` is what arithmetic uses."""

    target_digits: int
    guard_digits: int = MIN_GUARD_DIGITS

    def __post_init__(self):
        if self.target_digits < 1:
            raise ValueError(f"target_digits must be positive, got {self.target_digits}")
        if self.guard_digits < MIN_GUARD_DIGITS:
            raise ValueError(
                f"guard_digits must be >= {MIN_GUARD_DIGITS}, got {self.guard_digits}"
            )

    @property
    def working_bits(self) -> int:
        return bits_for_digits(self.target_digits + self.guard_digits)

    def with_extra_guard(self, digits: int) -> "PrecisionPolicy":
        return PrecisionPolicy(self.target_digits, self.guard_digits + max(0, digits))

    def kernel_policy(self, n: int, t: float) -> "PrecisionPolicy":
        """Policy for a kernel evaluation at ``t`` (extra digits for cancellation)."""
        extra = math.ceil((n + 1) * math.log10(max(1.0, t))) if n >= 0 else 0
        return self.with_extra_guard(extra)


Operand = Union["Real", int, Fraction]


class Real:
    """A binary floating-point value together with the precision it carries.

    Binary operations round to the larger of the operand precisions.  Exact
    ``int``/``Fraction`` operands are converted at that precision.
    """

    __slots__ = ("mpf", "prec")

    def __init__(self, mpf: tuple, prec: int):
        if prec < 2:
            raise ValueError(f"precision must be >= 2 bits, got {prec}")
        self.mpf = mpf
        self.prec = prec

    # construction -----------------------------------------------------
    @classmethod
    def from_int(cls, n: int, prec: int) -> "Real":
        return cls(from_int(n, prec, RND), prec)

    @classmethod
    def from_fraction(cls, q: Fraction | int, prec: int) -> "Real":
        q = Fraction(q)
        return cls(from_rational(q.numerator, q.denominator, prec, RND), prec)

    @classmethod
    def from_decimal(cls, text: str, prec: int) -> "Real":
        return cls(libmp.from_str(text, prec, RND), prec)

    @classmethod
    def zero(cls, prec: int) -> "Real":
        return cls(fzero, prec)

    def with_prec(self, prec: int) -> "Real":
        """Round (or widen) to ``prec`` bits."""
        return Real(libmp.mpf_pos(self.mpf, prec, RND), prec)

    # arithmetic -------------------------------------------------------
    def _coerce(self, other: Operand) -> tuple[tuple, int] | None:
        if isinstance(other, Real):
            return other.mpf, max(self.prec, other.prec)
        if isinstance(other, int):
            return from_int(other, self.prec, RND), self.prec
        if isinstance(other, Fraction):
            return (
                from_rational(other.numerator, other.denominator, self.prec, RND),
                self.prec,
            )
        return None

    def __add__(self, other: Operand) -> "Real":
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Real(mpf_add(self.mpf, c[0], c[1], RND), c[1])

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "Real":
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Real(mpf_sub(self.mpf, c[0], c[1], RND), c[1])

    def __rsub__(self, other: Operand) -> "Real":
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Real(mpf_sub(c[0], self.mpf, c[1], RND), c[1])

    def __mul__(self, other: Operand) -> "Real":
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Real(mpf_mul(self.mpf, c[0], c[1], RND), c[1])

    __rmul__ = __mul__

    def __truediv__(self, other: Operand) -> "Real":
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        if c[0] == fzero:
            raise ZeroDivisionError("division of Real by zero")
        return Real(mpf_div(self.mpf, c[0], c[1], RND), c[1])

    def __rtruediv__(self, other: Operand) -> "Real":
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        if self.mpf == fzero:
            raise ZeroDivisionError("division of Real by zero")
        return Real(mpf_div(c[0], self.mpf, c[1], RND), c[1])

    def __pow__(self, k: int) -> "Real":
        if not isinstance(k, int):
            return NotImplemented
        return Real(libmp.mpf_pow_int(self.mpf, k, self.prec, RND), self.prec)

    def __neg__(self) -> "Real":
        return Real(mpf_neg(self.mpf), self.prec)

    def __abs__(self) -> "Real":
        return Real(mpf_abs(self.mpf), self.prec)

    # comparison -------------------------------------------------------
    def _cmp(self, other: Operand) -> int:
        c = self._coerce(other)
        if c is None:
            raise TypeError(f"cannot compare Real with {type(other).__name__}")
        return mpf_cmp(self.mpf, c[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Real, int, Fraction)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other: Operand) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: Operand) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: Operand) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: Operand) -> bool:
        return self._cmp(other) >= 0

    def __hash__(self) -> int:
        return hash(self.mpf)

    def identical(self, other: "Real") -> bool:
        """Bit-for-bit equality including precision."""
        return self.mpf == other.mpf and self.prec == other.prec

    # conversion -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.mpf == fzero

    def sign(self) -> int:
        return libmp.mpf_sign(self.mpf)

    def __float__(self) -> float:
        return to_float(self.mpf)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def to_decimal(self, places: int) -> str:
        """Fixed-point decimal string rounded to nearest at ``places`` digits."""
        if places < 0:
            raise ValueError("places must be non-negative")
        work = self.prec + bits_for_digits(places) + 16
        scaled = mpf_mul(self.mpf, from_int(10**places), work, RND)
        n = to_int(scaled, RND)
        sign = "-" if n < 0 else ""
        digits = str(abs(n)).rjust(places + 1, "0")
        if places == 0:
            return f"{sign}{digits}"
        return f"{sign}{digits[:-places]}.{digits[-places:]}"

    def to_sci(self, sig: int = 3) -> str:
        """Short scientific rendering for error bounds, e.g. ``2.1e-31``."""
        if self.is_zero():
            return "0"
        return libmp.to_str(self.mpf, sig, min_fixed=1, max_fixed=0)

    def __repr__(self) -> str:
        digits = max(1, int(self.prec / LOG2_10))
        return f"Real('{libmp.to_str(self.mpf, digits)}', prec={self.prec})"

    def __str__(self) -> str:
        return libmp.to_str(self.mpf, max(1, int(self.prec / LOG2_10)))


def real_from_rational(q: Fraction | int, policy: PrecisionPolicy) -> Real:
    """Nearest value to ``q`` at the policy's working precision."""
    return Real.from_fraction(q, policy.working_bits)


def exp_real(x: Real) -> Real:
    return Real(mpf_exp(x.mpf, x.prec, RND), x.prec)


def log_real(x: Real) -> Real:
    if x.sign() <= 0:
        raise DomainError(f"log of non-positive value {float(x)!r}")
    return Real(mpf_log(x.mpf, x.prec, RND), x.prec)


def pi(policy: PrecisionPolicy | int) -> Real:
    prec = policy if isinstance(policy, int) else policy.working_bits
    return Real(mpf_pi(prec, RND), prec)

