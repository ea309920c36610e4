import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import mpmath
import pytest

from stirling_ramanujan import constants as C
from stirling_ramanujan.bigreal import PrecisionPolicy, Real
from stirling_ramanujan.errors import CertificationFailed, DomainError
from stirling_ramanujan.euler_maclaurin import em_estimate_power
from stirling_ramanujan.exact import bernoulli_number, harmonic, r_hat, r_n


def mp(x: Real):
    return mpmath.mpf(x.mpf)


def mq(q):
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


def s_reference(n):
    # S_n = -zeta'(-n) + B_{n+1} H_n / (n+1) for n >= 0; gamma at n = -1
    if n == -1:
        return +mpmath.euler
    return -mpmath.zeta(-n, derivative=1) + mq(bernoulli_number(n + 1) * harmonic(n) / (n + 1))


@pytest.fixture(autouse=True)
def _mp_dps():
    with mpmath.workdps(80):
        yield


class TestStirlingRamanujan:
    def test_s0_closed_form(self):
        r = C.stirling_ramanujan(0, 25)
        assert r.decimal.startswith("0.918938")
        assert abs(mp(r.value) - mpmath.log(2 * mpmath.pi) / 2) < mpmath.mpf(10) ** -25

    def test_s2(self):
        assert C.stirling_ramanujan(2, 25).decimal.startswith("0.030448")

    def test_gamma_against_em_oracle(self):
        r = C.stirling_ramanujan(-1, 25)
        oracle = em_estimate_power(-1, 200, 8, PrecisionPolicy(30))
        assert abs(mp(r.value) - mp(oracle)) < mpmath.mpf(10) ** -25
        assert r.decimal.startswith("0.577215")

    @pytest.mark.parametrize("method", ["integral", "euler_maclaurin"])
    @pytest.mark.parametrize("n", range(-1, 8))
    def test_error_bound_is_honest(self, n, method):
        r = C.stirling_ramanujan(n, 30, method)
        assert abs(mp(r.value) - s_reference(n)) <= mp(r.error_bound)
        assert mp(r.error_bound) < mpmath.mpf(10) ** -30

    @pytest.mark.parametrize("digits", [20, 30])
    def test_methods_agree(self, digits):
        for n in range(-1, 6):
            a = C.stirling_ramanujan(n, digits, "integral")
            b = C.stirling_ramanujan(n, digits, "euler_maclaurin")
            assert abs(mp(a.value) - mp(b.value)) < mpmath.mpf(10) ** -(digits - 5)

    def test_both_reports_em_in_provenance(self):
        r = C.stirling_ramanujan(1, 20, "both")
        assert r.method_used == "both"
        assert r.provenance["euler_maclaurin"]["value"] == r.decimal

    def test_both_refuses_disagreement(self, monkeypatch):
        real_em = C._euler_maclaurin

        def skewed(req):
            res = real_em(req)
            return C.ConstantResult(res.kind, res.n, res.digits, res.method_used,
                                    res.value + Fraction(1, 10**12), res.error_bound, res.provenance)

        monkeypatch.setitem(C._ROUTES, "euler_maclaurin", skewed)
        monkeypatch.setattr(C, "_euler_maclaurin", skewed)
        with pytest.raises(CertificationFailed):
            C.stirling_ramanujan(2, 20, "both")

    def test_precision_scaling(self):
        for n in (-1, 0, 3, 5):
            a = C.stirling_ramanujan(n, 30)
            b = C.stirling_ramanujan(n, 60)
            assert abs(mp(a.value) - mp(b.value)) <= mpmath.mpf(10) ** -30
            assert b.value.to_decimal(30) == a.decimal

    def test_crossover_override(self):
        a = C.stirling_ramanujan(2, 25, crossover_t0=Fraction(1, 2))
        b = C.stirling_ramanujan(2, 25, crossover_t0=Fraction(3))
        assert abs(mp(a.value) - mp(b.value)) < mpmath.mpf(10) ** -25


class TestRelatives:
    @pytest.mark.parametrize("n", range(0, 6))
    def test_upsilon_relation(self, n):
        from math import factorial

        S = C.stirling_ramanujan(n, 25).value
        U = C.upsilon(n, 30).value
        assert abs(mp(S) - (-1) ** (n + 1) * factorial(n) * (mp(U) - mq(r_n(n)))) < mpmath.mpf(10) ** -23

    @pytest.mark.parametrize("n", range(0, 6))
    def test_s_tilde_relation(self, n):
        S = C.stirling_ramanujan(n, 25).value
        T = C.s_tilde(n, 25).value
        assert abs(mp(S) - mp(T) - mq(r_hat(n))) < mpmath.mpf(10) ** -23

    def test_upsilon_special_values(self):
        assert abs(mp(C.upsilon(-1, 25).value) - mpmath.euler) < mpmath.mpf(10) ** -25
        assert abs(mp(C.upsilon(1, 25).value) - (mpmath.log(mpmath.glaisher) - mpmath.mpf(1) / 4)) < mpmath.mpf(10) ** -25

    def test_s_tilde_special_values(self):
        assert C.s_tilde(0, 20).decimal.startswith("-0.081061")
        assert abs(mp(C.s_tilde(1, 25).value) - (mpmath.log(mpmath.glaisher) - mpmath.mpf(1) / 4)) < mpmath.mpf(10) ** -25
        assert C.s_tilde(-1, 20).decimal == C.upsilon(-1, 20).decimal

    @pytest.mark.parametrize("method", ["integral", "euler_maclaurin", "both"])
    def test_zeta(self, method):
        assert abs(mp(C.zeta_integral(2, 30, method).value) - mpmath.pi**2 / 6) < mpmath.mpf(10) ** -30
        assert abs(mp(C.zeta_integral(3, 30, method).value) - mpmath.zeta(3)) < mpmath.mpf(10) ** -30
        assert abs(mp(C.zeta_integral(4, 30, method).value) - mpmath.pi**4 / 90) < mpmath.mpf(10) ** -30

    @pytest.mark.parametrize("kind", ["Upsilon", "S_tilde"])
    def test_em_route_for_relatives(self, kind):
        for n in (0, 2, 5):
            a = C.compute(C.ConstantRequest(kind, n, 25, "integral"))
            b = C.compute(C.ConstantRequest(kind, n, 25, "euler_maclaurin"))
            assert abs(mp(a.value) - mp(b.value)) <= mp(a.error_bound) + mp(b.error_bound)

    def test_named(self):
        assert C.euler_gamma(20).decimal == "0.57721566490153286061"
        assert C.glaisher_log(20).decimal == C.stirling_ramanujan(1, 20).decimal


class TestRequest:
    def test_validation(self):
        with pytest.raises(DomainError):
            C.ConstantRequest("T", 0, 10)
        with pytest.raises(DomainError):
            C.ConstantRequest("S", -2, 10)
        with pytest.raises(DomainError):
            C.ConstantRequest("zeta", 1, 10)
        with pytest.raises(DomainError):
            C.ConstantRequest("S", 0, 0)
        with pytest.raises(DomainError):
            C.ConstantRequest("S", 0, 10, "guess")

    def test_named_kinds_pin_n(self):
        assert C.ConstantRequest("gamma", 7, 10).n == -1
        assert C.ConstantRequest("glaisher_log", 7, 10).n == 1

    def test_key(self):
        assert C.ConstantRequest("S", 2, 15, "both").key == "S:2:15:both"

    def test_record(self):
        rec = C.stirling_ramanujan(0, 12).to_record()
        assert set(rec) == {"kind", "n", "digits", "method", "value", "error_bound", "nodes", "truncation_T"}
        assert rec["value"] == "0.918938533205"
        em = C.stirling_ramanujan(0, 12, "euler_maclaurin").to_record()
        assert em["nodes"] is None and em["truncation_T"] is None


class TestTable:
    def test_paper_rows(self):
        rows = C.constants_table(3, 20)
        assert [r.n for r in rows] == [-1, 0, 1, 2, 3]
        got = {r.n: r.integral.decimal[: 8 if r.integral.value.sign() > 0 else 9] for r in rows}
        assert got[0] == "0.918938"
        assert got[1] == "0.248754"
        assert got[2] == "0.030448"
        # natural-log value of S_3; the base-10 value -0.008971 differs by log(10)
        assert got[3] == "-0.020656"
        assert f"{float(rows[-1].integral.value) / float(mpmath.log(10)):.6f}" == "-0.008971"
        assert all(r.discrepancy < Fraction(1, 10**15) for r in rows)

    def test_small_table_is_fast(self):
        t = time.perf_counter()
        C.constants_table(0, 10)
        assert time.perf_counter() - t < 5

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            C.constants_table(-1, 10)


def test_concurrent_requests_are_deterministic():
    reqs = [C.ConstantRequest("S", n, 22) for n in (0, 1, 2, 3)] * 3
    with ThreadPoolExecutor(max_workers=4) as pool:
        out = list(pool.map(lambda r: C.compute(r).decimal, reqs))
    assert out[:4] == out[4:8] == out[8:]
