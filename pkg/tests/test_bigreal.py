from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stirling_ramanujan.bigreal import (
    PrecisionPolicy,
    Real,
    bits_for_digits,
    exp_real,
    log_real,
    pi,
    real_from_rational,
)
from stirling_ramanujan.errors import DomainError

PI_50 = "3.14159265358979323846264338327950288419716939937511"  # rounded, next digits 58...


def ulp(x: Real) -> Fraction:
    # one unit in the last place of x at its precision
    sign, man, exp, bc = x.mpf
    return Fraction(2) ** (exp + bc - x.prec)


def as_fraction(x: Real) -> Fraction:
    sign, man, exp, bc = x.mpf
    v = Fraction(man) * Fraction(2) ** exp
    return -v if sign else v


class TestPolicy:
    def test_working_bits(self):
        p = PrecisionPolicy(30)
        assert p.guard_digits == 10
        assert p.working_bits == bits_for_digits(40) == 133

    def test_guard_floor(self):
        with pytest.raises(ValueError):
            PrecisionPolicy(30, guard_digits=5)
        with pytest.raises(ValueError):
            PrecisionPolicy(0)

    def test_kernel_policy_grows_with_t(self):
        p = PrecisionPolicy(30)
        assert p.kernel_policy(3, 100.0).guard_digits == 10 + 8
        assert p.kernel_policy(3, 0.5).guard_digits == 10


class TestConversion:
    def test_one_third(self):
        x = real_from_rational(Fraction(1, 3), PrecisionPolicy(50))
        assert x.to_decimal(50) == "0." + "3" * 50

    def test_zero_is_exact(self):
        for prec in (10, 100, 1000):
            assert Real.from_fraction(Fraction(0), prec).is_zero()

    def test_round_trip_within_half_ulp(self):
        q = Fraction(691, 2730)
        x = real_from_rational(q, PrecisionPolicy(40))
        assert abs(as_fraction(x) - q) <= ulp(x) / 2

    @given(st.integers(-10**30, 10**30), st.integers(1, 10**30), st.integers(20, 400))
    def test_rounding_contract(self, a, b, prec):
        q = Fraction(a, b)
        x = Real.from_fraction(q, prec)
        if q == 0:
            assert x.is_zero()
        else:
            assert abs(as_fraction(x) - q) <= ulp(x) / 2

    def test_to_decimal_rounds_to_nearest(self):
        x = Real.from_fraction(Fraction(2, 3), 200)
        assert x.to_decimal(5) == "0.66667"
        assert (-x).to_decimal(5) == "-0.66667"
        assert Real.from_int(7, 20).to_decimal(0) == "7"
        assert Real.from_fraction(Fraction(-1, 200), 100).to_decimal(2) == "-0.01"

    def test_to_decimal_small_values_zero_padded(self):
        x = Real.from_fraction(Fraction(1, 10**8), 200)
        assert x.to_decimal(10) == "0.0000000100"


class TestArithmetic:
    @given(
        st.fractions(max_denominator=10**6),
        st.fractions(max_denominator=10**6),
    )
    def test_ops_within_one_ulp(self, p, q):
        prec = 200
        x, y = Real.from_fraction(p, prec), Real.from_fraction(q, prec)
        for got, exact in ((x + y, as_fraction(x) + as_fraction(y)),
                           (x - y, as_fraction(x) - as_fraction(y)),
                           (x * y, as_fraction(x) * as_fraction(y))):
            if exact == 0:
                continue
            assert abs(as_fraction(got) - exact) <= ulp(got)

    def test_mixed_operands(self):
        x = Real.from_int(3, 100)
        assert (x + 1) == 4
        assert (1 - x) == -2
        assert (x * Fraction(1, 3)) == 1
        assert (6 / x) == 2

    def test_precision_is_max_of_operands(self):
        assert (Real.from_int(1, 50) + Real.from_int(1, 300)).prec == 300

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            Real.from_int(1, 50) / 0

    def test_eq_hash(self):
        a = Real.from_int(5, 60)
        b = Real.from_int(5, 120)
        assert a == b and hash(a) == hash(b)
        assert not a.identical(b)

    def test_comparisons(self):
        a, b = Real.from_int(1, 60), Real.from_int(2, 60)
        assert a < b <= b and b > a >= a
        assert abs(-a) == a


class TestElementary:
    def test_exp_zero(self):
        assert exp_real(Real.zero(100)) == 1

    def test_log_exp_inverse(self):
        one = Real.from_int(1, 200)
        x = log_real(exp_real(one))
        assert abs(as_fraction(x) - 1) <= 2 * ulp(one)

    def test_log_domain(self):
        with pytest.raises(DomainError):
            log_real(Real.zero(50))
        with pytest.raises(DomainError):
            log_real(Real.from_int(-2, 50))

    def test_pi_30_digits(self):
        assert pi(PrecisionPolicy(30)).to_decimal(30) == "3.141592653589793238462643383280"
        assert pi(PrecisionPolicy(50)).to_decimal(50) == PI_50

    def test_pi_against_machin(self):
        # independent series: pi = 16 atan(1/5) - 4 atan(1/239)
        def atan_inv(x, terms):
            return sum(Fraction((-1) ** k, (2 * k + 1) * x ** (2 * k + 1)) for k in range(terms))

        machin = 16 * atan_inv(5, 80) - 4 * atan_inv(239, 30)
        p = pi(300)
        assert abs(as_fraction(p) - machin) < Fraction(1, 10**85)

    def test_against_mpmath(self):
        with mpmath.workdps(60):
            x = Real.from_fraction(Fraction(7, 3), 200)
            assert abs(mpmath.mpf(exp_real(x).mpf) - mpmath.exp(mpmath.mpf(7) / 3)) < mpmath.mpf(10) ** -55
            assert abs(mpmath.mpf(log_real(x).mpf) - mpmath.log(mpmath.mpf(7) / 3)) < mpmath.mpf(10) ** -55

    def test_determinism(self):
        a = log_real(Real.from_fraction(Fraction(22, 7), 333))
        b = log_real(Real.from_fraction(Fraction(22, 7), 333))
        assert a.identical(b)
