import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stirling_ramanujan.bigreal import Real
from stirling_ramanujan.errors import DomainError
from stirling_ramanujan.exact import b_coeff, r_n
from stirling_ramanujan.integrand import (
    IntegrandSpec,
    Kind,
    compile_kernel,
    eval_frullani_kernel,
    eval_generator_kernel,
    eval_harmonic_kernel,
    eval_kernel,
    eval_malmsten_kernel,
    eval_stirling_kernel,
    eval_upsilon_kernel,
    eval_zeta_kernel,
    tail_bound,
)

PREC = 200
TOL = mpmath.mpf(2) ** -185


def R(x, prec=PREC) -> Real:
    return Real.from_fraction(Fraction(x), prec)


def mp(x: Real):
    return mpmath.mpf(x.mpf)


def mq(q) -> mpmath.mpf:
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


@pytest.fixture(autouse=True)
def _mp_dps():
    with mpmath.workdps(80):
        yield


def stirling_reference(n, t, with_r=True):
    # straightforward formula at very high precision as the oracle
    with mpmath.workdps(400):
        t = mpmath.mpf(t)
        poly = sum(mpmath.mpf(b_coeff(k).numerator) / b_coeff(k).denominator * t**k for k in range(-1, n + 1))
        if with_r:
            rn = r_n(n)
            poly += mpmath.mpf(rn.numerator) / rn.denominator * t ** (n + 1)
        return (1 / (1 - mpmath.exp(-t)) - poly) * mpmath.exp(-t) / t ** (n + 1)


class TestStirlingKernel:
    def test_limit_at_zero(self):
        # kernel = limit + O(t)
        tiny = R(Fraction(1, 10**30))
        assert abs(mp(eval_stirling_kernel(0, tiny)) + mpmath.mpf(11) / 12) < mpmath.mpf(10) ** -29
        assert abs(mp(eval_upsilon_kernel(0, tiny)) - mpmath.mpf(1) / 12) < mpmath.mpf(10) ** -29

    def test_limit_near_zero_is_constant_term(self):
        for n in range(-1, 6):
            c0 = b_coeff(n + 1) - r_n(n)
            v = eval_stirling_kernel(n, R(Fraction(1, 10**30)))
            assert abs(mp(v) - mq(c0)) < mpmath.mpf(10) ** -28

    def test_gamma_kernel_at_one(self):
        expected = (1 / (1 - mpmath.exp(-1)) - 1) * mpmath.exp(-1)
        assert abs(mp(eval_stirling_kernel(-1, R(1))) - expected) < TOL

    @pytest.mark.parametrize("n", range(-1, 7))
    def test_branch_agreement_at_crossover(self, n):
        t = R(1)
        a = eval_stirling_kernel(n, t, branch="series")
        b = eval_stirling_kernel(n, t, branch="direct")
        assert abs(mp(a) - mp(b)) < TOL

    @pytest.mark.parametrize("n", [0, 2, 5])
    @pytest.mark.parametrize("t", ["1/1000", "1/3", "1", "2", "7", "60"])
    def test_against_high_precision_reference(self, n, t):
        v = eval_stirling_kernel(n, R(Fraction(t)))
        ref = stirling_reference(n, mq(t))
        assert abs(mp(v) - ref) <= TOL * max(1, abs(ref))

    @pytest.mark.parametrize("n", range(0, 5))
    def test_upsilon_minus_stirling_is_r_e(self, n):
        for t in ("1/7", "1", "5/2", "9"):
            tt = R(Fraction(t))
            d = eval_upsilon_kernel(n, tt) - eval_stirling_kernel(n, tt)
            rn = r_n(n)
            expected = mpmath.mpf(rn.numerator) / rn.denominator * mpmath.exp(-mp(tt))
            assert abs(mp(d) - expected) < TOL

    def test_upsilon_direct_at_doubled_precision(self):
        a = eval_upsilon_kernel(1, R(2))
        b = eval_upsilon_kernel(1, R(2, 2 * PREC))
        assert abs(mp(a) - mp(b)) < TOL

    def test_custom_crossover(self):
        t = R(Fraction(1, 2))
        a = eval_stirling_kernel(3, t, crossover_t0=Fraction(3))
        b = eval_stirling_kernel(3, t)
        assert abs(mp(a) - mp(b)) < TOL

    def test_doubling_series_terms(self):
        t = R(Fraction(9, 10))
        spec = IntegrandSpec.stirling(2)
        k = compile_kernel(spec, PREC)
        a = eval_kernel(spec, t, "series")
        b = eval_kernel(IntegrandSpec.stirling(2, series_terms=2 * k.series_terms), t, "series")
        assert abs(mp(a) - mp(b)) < TOL


class TestGeneratingFunctionRemainder:
    def test_remainder_bound_at_half(self):
        # K = 41 is the first odd index past 40 (b_40 = 0 would make the bound vacuous)
        with mpmath.workdps(60):
            t = mpmath.mpf(1) / 2
            exact = 1 / (1 - mpmath.exp(-t))
            for K in (40, 41):
                partial = sum(mpmath.mpf(b_coeff(k).numerator) / b_coeff(k).denominator * t**k for k in range(-1, K + 1))
                Kb = K if b_coeff(K) else K + 1
                b = b_coeff(Kb)
                bound = 2 * abs(mpmath.mpf(b.numerator) / b.denominator) * t**Kb / (1 - t / (2 * mpmath.pi))
                assert abs(exact - partial) <= bound


class TestFrullaniKernel:
    def test_substitution(self):
        v = eval_frullani_kernel(0, 1, R(1))
        assert abs(mp(v) - (mpmath.exp(-1) - 1) * mpmath.exp(-1)) < TOL

    @pytest.mark.parametrize("s", [Fraction(1, 2), 1, 10])
    def test_limit_n1(self, s):
        v = eval_frullani_kernel(1, s, R(Fraction(1, 10**40)))
        assert abs(mp(v) - mq(s) ** 2 / 2) < mpmath.mpf(10) ** -36

    @pytest.mark.parametrize("n", range(0, 6))
    @pytest.mark.parametrize("s", [Fraction(1, 2), Fraction(1), Fraction(10)])
    def test_branch_agreement(self, n, s):
        a = eval_frullani_kernel(n, s, R(1), branch="series")
        b = eval_frullani_kernel(n, s, R(1), branch="direct")
        assert abs(mp(a) - mp(b)) < TOL * max(1, abs(mp(a)))


class TestOtherKernels:
    def test_zeta_limits(self):
        assert abs(mp(eval_zeta_kernel(2, R(Fraction(1, 10**30)))) - 1) < mpmath.mpf(10) ** -28
        expected = mpmath.exp(-1) / (1 - mpmath.exp(-1))
        assert abs(mp(eval_zeta_kernel(3, R(1))) - expected) < TOL

    @given(st.integers(2, 8), st.fractions(min_value=Fraction(1, 10**6), max_value=200, max_denominator=10**6))
    def test_zeta_positive(self, m, t):
        assert eval_zeta_kernel(m, R(t, 100)) > 0

    def test_zeta_branches(self):
        for m in (2, 3, 6):
            a = eval_zeta_kernel(m, R(1), branch="series")
            b = eval_zeta_kernel(m, R(1), branch="direct")
            assert abs(mp(a) - mp(b)) < TOL

    @pytest.mark.parametrize("s", [0, 1, 3, 10, Fraction(5, 2)])
    def test_malmsten_limit_and_branches(self, s):
        s = Fraction(s)
        lim = eval_malmsten_kernel(s, R(Fraction(1, 10**40)))
        assert abs(mp(lim) - mq(s * (s - 1) / 2)) < mpmath.mpf(10) ** -36
        a = eval_malmsten_kernel(s, R(1), branch="series")
        b = eval_malmsten_kernel(s, R(1), branch="direct")
        assert abs(mp(a) - mp(b)) < TOL * max(1, abs(mp(a)))

    def test_malmsten_series_vs_direct_small_t(self):
        # direct branch at t = 10^-3 with enough precision to survive cancellation
        s = Fraction(1)
        t = R(Fraction(1, 1000), 400)
        a = eval_malmsten_kernel(s, t, branch="series")
        b = eval_malmsten_kernel(s, t, branch="direct")
        assert abs(mp(a) - mp(b)) < mpmath.mpf(10) ** -60

    def test_harmonic_and_generator(self):
        t = R(Fraction(3, 2))
        e = mpmath.exp(-mpmath.mpf(3) / 2)
        assert abs(mp(eval_harmonic_kernel(3, t)) - (e + e**2 + e**3)) < TOL
        assert abs(mp(eval_generator_kernel(Fraction(1, 2), t)) - mpmath.exp(-mpmath.mpf(9) / 4)) < TOL


class TestValidation:
    def test_domain_errors(self):
        with pytest.raises(DomainError):
            eval_stirling_kernel(0, R(0))
        with pytest.raises(DomainError):
            eval_stirling_kernel(0, R(-1))
        with pytest.raises(DomainError):
            IntegrandSpec.stirling(-2)
        with pytest.raises(DomainError):
            IntegrandSpec.frullani(0, 0)
        with pytest.raises(DomainError):
            IntegrandSpec.frullani(-1, 1)
        with pytest.raises(DomainError):
            IntegrandSpec.zeta(1)
        with pytest.raises(DomainError):
            IntegrandSpec.harmonic(0)
        with pytest.raises(DomainError):
            IntegrandSpec.malmsten(-1)
        with pytest.raises(DomainError):
            IntegrandSpec.stirling(0, crossover_t0=Fraction(7))
        with pytest.raises(DomainError):
            IntegrandSpec.stirling(0, crossover_t0=0)

    def test_kind_and_describe(self):
        spec = IntegrandSpec.frullani(2, Fraction(1, 2))
        assert spec.kind is Kind.FRULLANI
        assert spec.describe() == {"kind": "frullani", "n": 2, "s": "1/2"}

    def test_specs_hashable_and_equal(self):
        assert IntegrandSpec.stirling(3) == IntegrandSpec.stirling(3)
        assert hash(IntegrandSpec.zeta(2)) == hash(IntegrandSpec.zeta(2))


SPECS = [
    IntegrandSpec.stirling(-1),
    IntegrandSpec.stirling(0),
    IntegrandSpec.stirling(4),
    IntegrandSpec.upsilon(3),
    IntegrandSpec.frullani(0, 1),
    IntegrandSpec.frullani(3, 10),
    IntegrandSpec.zeta(2),
    IntegrandSpec.zeta(5),
    IntegrandSpec.harmonic(4),
    IntegrandSpec.malmsten(3),
    IntegrandSpec.generator(Fraction(1, 2)),
]


class TestTailBound:
    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: str(s.describe()))
    def test_bounds_true_tail(self, spec):
        T = 12
        k = compile_kernel(spec, 120)

        def f(t):
            return abs(mpmath.mpf(k(mpmath.mpf(t)._mpf_)))

        with mpmath.workdps(30):
            true_tail = mpmath.quad(f, [T, 2 * T, 4 * T, mpmath.inf])
        assert true_tail <= mp(tail_bound(spec, T))

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: str(s.describe()))
    def test_monotone(self, spec):
        bounds = [tail_bound(spec, T) for T in (1, 2, 5, 10, 40, 100)]
        assert all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))

    def test_generator_closed_form(self):
        s = Fraction(2)
        b = mp(tail_bound(IntegrandSpec.generator(s), 5))
        exact = mpmath.exp(-15) / 3
        assert exact <= b <= exact * (1 + mpmath.mpf(2) ** -20)

    def test_scale_at_40(self):
        b = tail_bound(IntegrandSpec.stirling(0), 40)
        assert float(b) < 1e-13 * 3

    def test_requires_T_at_least_one(self):
        with pytest.raises(DomainError):
            tail_bound(IntegrandSpec.stirling(0), Fraction(1, 2))
