from fractions import Fraction
from math import comb

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from hypersos.certkit import sturm_nonneg, verify_certificate
from hypersos.twopoint import (AB, TSPACE, CertificateError, S_poly, TwoPointParams, build_P, build_P_unchecked,
                               case2_endpoint_value, case2_endpoint_value_printed, case2_quadratic,
                               check_Qtilde_recurrence, check_S_recurrence, compute_Q, homogeneous_target,
                               homogenize_certificate, prove_Q0_nonneg, prove_Qi_nonneg, puzzle_check,
                               q_decomposition_squares, q_polys, qtilde_polys, rho_star, twopoint_certificate)

t = TSPACE.var("t")
a, b = AB.var("a"), AB.var("b")
sa, sb, st_ = sympy.symbols("a b t")


def sympy_P(k, rho):
    rho = sympy.Rational(rho.numerator, rho.denominator)
    wp, wm = sympy.Rational(1, 4) + rho / 4, sympy.Rational(1, 4) - rho / 4
    A0, A1, B0, B1 = (1 + sa) ** (2 * k), (1 - sa) ** (2 * k), (1 + sb) ** (2 * k), (1 - sb) ** (2 * k)
    return sympy.expand(wp * (A0 * B0 + A1 * B1) + wm * (A0 * B1 + A1 * B0) - 1)


def to_sympy(p, names):
    syms = {i: sympy.Symbol(n) for i, n in enumerate(p.space.labels) if n in names}
    out = 0
    for m, c in p.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for j in range(0, len(m), 2):
            term *= syms[m[j]] ** m[j + 1]
        out += term
    return sympy.expand(out)


def sympy_Q(k):
    """Coefficients of s^(2i) after r = a - b, s = a + b, t = ab, by brute expansion."""
    rho = sympy.Rational(1) - sympy.Rational(1, 2 * k)
    s, r = sympy.symbols("s r")
    wa, wb = (1 + rho) / 2, (1 - rho) / 2
    # (1+a)^2k (1+b)^2k + (1-a)^2k (1-b)^2k = sum over even powers of s: 2 sum C(2k,2i) s^2i (1+t)^(2k-2i)
    # cross blocks use (1+a)(1-b)(1-a)(1+b) pairing: (1-t)^2 - r^2 with r^2 = s^2 - 4t
    P = 0
    for i in range(k + 1):
        P += wa * comb(2 * k, 2 * i) * s ** (2 * i) * (1 + st_) ** (2 * k - 2 * i)
    for j in range(k + 1):
        P += wb * comb(2 * k, 2 * j) * (1 - st_) ** (2 * k - 2 * j) * (s ** 2 - 4 * st_) ** j
    P = sympy.expand(P - 1)
    return [sympy.expand(P.coeff(s, 2 * i)) for i in range(k + 1)]


def test_build_P_small_cases():
    assert build_P(1, Fraction(1, 2)) == a * a * b * b + a * a + 2 * a * b + b * b
    for k in range(1, 5):
        assert build_P(k).eval({"a": 0, "b": 0}) == 0


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("rho", [Fraction(0), Fraction(1, 3)])
def test_build_P_against_sympy(k, rho):
    rho = min(rho, rho_star(k))
    assert to_sympy(build_P(k, rho), "ab") == sympy_P(k, rho)


def test_q_values_from_independent_expansion():
    assert compute_Q(1).Q[0] == t * t and compute_Q(1).Q[1] == 1
    assert compute_Q(2).Q[0] == t ** 4 + 14 * t ** 2
    for k in range(1, 5):
        ours = [to_sympy(q, "t") for q in compute_Q(k).Q]
        assert ours == sympy_Q(k)


def test_families():
    for k in range(1, 11):
        assert qtilde_polys(k)[k] == 1
    for k in range(1, 9):
        fam = compute_Q(k)
        for q in fam.Q + fam.Qtilde:
            assert sturm_nonneg(q)


def test_S_poly_and_recurrence():
    num, den = S_poly(0)
    assert num == 1 and den == 1
    num, den = S_poly(1)
    assert num == t * t - 6 * t + 1 and den == (1 + t) ** 2
    assert check_S_recurrence(2) and check_S_recurrence(32)
    bad = check_S_recurrence(10, middle=Fraction(-3))
    assert not bad and bad.node == 0
    # k = 3 numerator at t = 2 satisfies the recurrence with its neighbours
    n1, n2, n3 = (S_poly(j)[0].eval({"t": 2}) for j in (1, 2, 3))
    assert n3 - 2 * (4 - 12 + 1) * n2 + 3 ** 4 * n1 == 0


def test_qtilde_recurrence():
    assert check_Qtilde_recurrence(10)


def test_Q0_evidence_and_endpoint_correction():
    for k in range(1, 7):
        ev = prove_Q0_nonneg(k)
        assert ev, ev.checks
    q = case2_quadratic(2)
    assert q.eval({"t": Fraction(1, 12)}) == case2_endpoint_value(2) == Fraction(2992, 405)
    assert case2_endpoint_value_printed(2) == Fraction(16 * 19, 405)
    assert not prove_Q0_nonneg(2).notes["printed_endpoint_matches"]


def test_Qi_evidence():
    for k in range(1, 6):
        fam = compute_Q(k)
        for i in range(1, k + 1):
            assert prove_Qi_nonneg(k, i, fam)


def test_sharpness_at_quarter():
    q = q_polys(1, Fraction(1, 4))[0]
    assert q == t * t - t
    assert not sturm_nonneg(q)
    with pytest.raises(CertificateError):
        q_decomposition_squares(1, Fraction(1, 4))
    assert q.eval({"t": Fraction(1, 2)}) < 0
    assert compute_Q(1).Q[0] != q and build_P_unchecked(1, Fraction(1, 2)) == build_P(1)


def test_certificate_k1():
    cert = twopoint_certificate(TwoPointParams(1, Fraction(1, 2)))
    assert sorted((c, s.to_text()) for c, s in cert.u0) == [(1, "a + b"), (1, "a*b")]
    assert verify_certificate(twopoint_certificate(TwoPointParams(1, Fraction(0))), degree_bound=4)


@pytest.mark.parametrize("k", range(1, 9))
def test_certificates_at_three_rhos(k):
    rs = rho_star(k)
    for rho in (Fraction(0), rs / 3, rs):
        assert verify_certificate(twopoint_certificate(TwoPointParams(k, rho)), degree_bound=4 * k)


@given(st.integers(1, 4), st.fractions(min_value=0, max_value=1, max_denominator=30))
def test_certificates_for_random_rho(k, frac):
    rho = frac * rho_star(k)
    cert = twopoint_certificate(TwoPointParams(k, rho))
    assert verify_certificate(cert, degree_bound=4 * k)


def test_params_validated():
    with pytest.raises(ValueError):
        TwoPointParams(2, Fraction(4, 5))
    with pytest.raises(ValueError):
        TwoPointParams(0, Fraction(0))


def test_homogenization():
    for k in (1, 2):
        p = TwoPointParams(k, rho_star(k))
        hc = homogenize_certificate(twopoint_certificate(p), p)
        assert verify_certificate(hc, degree_bound=4 * k)
        assert hc.target == homogeneous_target(p)
        back = hc.target.substitute({"mu": 1, "nu": 1}, hc.target.space)
        assert back.substitute({"alpha": a, "beta": b}, AB) == build_P(p)
    hc = homogenize_certificate(twopoint_certificate(TwoPointParams(1, Fraction(1, 2))), TwoPointParams(1, Fraction(1, 2)))
    assert sorted(s.to_text() for _, s in hc.u0) == ["alpha*beta", "mu*beta + nu*alpha"]


def test_puzzle():
    r = puzzle_check()
    assert r["weights"] == (Fraction(11, 24), Fraction(1, 24))
    assert r["residual_zero"] and r["squares_match_expression"] and r["nonneg_coefficients"]
    assert r["certificate_valid"]
    assert r["eval_1_2"][0] == r["eval_1_2"][1]
    assert build_P(3).eval({"a": 1, "b": 2}) == r["eval_1_2"][0]
