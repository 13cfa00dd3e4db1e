import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypersos.certkit import ResourceExhausted, verify_certificate, verify_dag
from hypersos.polycore import IndeterminateSpace
from hypersos.reversecert import (CubeIndeterminates, base_case_certificate, build_expectations,
                                  inductive_certificate, pair_weight, points, soundness_probe)
from hypersos.twopoint import AB, build_P, puzzle_terms, rho_star


def test_point_order_and_ids():
    assert points(2) == [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    cube = CubeIndeterminates.create(3)
    ids = list(cube.f_vars.values()) + list(cube.g_vars.values())
    assert len(set(ids)) == 2 * 8


def test_expectations_small():
    e = build_expectations(1, 1, 0)
    sp = e.cube.space
    F0, F1 = e.cube.F((1,)), e.cube.F((-1,))
    G0, G1 = e.cube.G((1,)), e.cube.G((-1,))
    assert e.lhs == (F0 ** 2 * G0 ** 2 + F0 ** 2 * G1 ** 2 + F1 ** 2 * G0 ** 2 + F1 ** 2 * G1 ** 2) / 4
    e = build_expectations(1, 1, Fraction(1, 2))
    assert e.lhs.coeff((e.cube.f_vars[(1,)], 2, e.cube.g_vars[(1,)], 2)) == Fraction(3, 8)
    assert e.lhs.coeff((e.cube.f_vars[(1,)], 2, e.cube.g_vars[(-1,)], 2)) == Fraction(1, 8)


def test_pair_weights_n2():
    rho = Fraction(1, 3)
    for x in points(2):
        assert sum(pair_weight(x, y, rho) for y in points(2)) == Fraction(1, 4)
    assert sum(pair_weight(x, y, rho) for x in points(2) for y in points(2)) == 1


def test_rho_range():
    with pytest.raises(ValueError):
        build_expectations(1, 1, Fraction(3, 4))
    with pytest.raises(ValueError):
        inductive_certificate(1, 2, Fraction(4, 5))


def test_base_case_k1():
    cert = base_case_certificate(1, Fraction(1, 2))
    sp = cert.space
    F0, F1, G0, G1 = (sp.var(v) for v in ("F0", "F1", "G0", "G1"))
    target = (Fraction(3, 8) * (F0 ** 2 * G0 ** 2 + F1 ** 2 * G1 ** 2) + Fraction(1, 8) * (F0 ** 2 * G1 ** 2 + F1 ** 2 * G0 ** 2)
              - ((F0 + F1) / 2) ** 2 * ((G0 + G1) / 2) ** 2)
    assert cert.target == target and verify_certificate(cert)
    assert verify_certificate(base_case_certificate(1, 0))


def test_base_case_matches_puzzle():
    cert = base_case_certificate(3, Fraction(5, 6))
    sp = cert.space
    # setting F = (1+a, 1-a), G = (1+b, 1-b) (times 1/2 scale) returns P_3
    sub = {"F0": 1 + AB.var("a"), "F1": 1 - AB.var("a"), "G0": 1 + AB.var("b"), "G1": 1 - AB.var("b")}
    assert cert.target.substitute(sub, AB) == build_P(3)
    lifted = sum((c * s.substitute(sub, AB) ** 2 for c, s in cert.u0), AB.zero())
    assert lifted == sum((c * s * s for c, s in puzzle_terms()), AB.zero())


@pytest.mark.parametrize("n,k,rho", [(1, 1, Fraction(1, 2)), (2, 1, Fraction(1, 2)), (2, 1, Fraction(0)),
                                     (3, 2, Fraction(3, 4)), (2, 3, Fraction(5, 6)), (3, 1, Fraction(1, 3))])
def test_inductive_dag(n, k, rho):
    dag, e = inductive_certificate(n, k, rho)
    assert verify_dag(dag, target=e.target, degree_bound=4 * k)
    leaves = len(dag.leaves())
    assert leaves == 4 ** (n - 1)
    assert len(dag) == (4 ** n - 1) // 3 + leaves


def test_g_equals_f():
    dag, e = inductive_certificate(2, 1, 0, g_equals_f=True)
    sp = e.cube.space
    assert e.rhs == sum((sp.var(v) for v in e.cube.f_vars.values()), sp.zero()) ** 4 / 4 ** 4
    assert verify_dag(dag, target=e.target, degree_bound=4)


def test_rho_dependence():
    # affine in rho for n = 1; in general a polynomial of degree n (pair weights are products)
    k = 2
    rs = rho_star(k)
    cube = CubeIndeterminates.create(1)
    t0, t1 = build_expectations(1, k, 0, cube).target, build_expectations(1, k, rs, cube).target
    rho = Fraction(1, 5)
    assert build_expectations(1, k, rho, cube).target == t0 * (1 - rho / rs) + t1 * (rho / rs)
    for n in (2, 3):
        cube = CubeIndeterminates.create(n)
        ts = [build_expectations(n, k, Fraction(j, 10), cube).target for j in range(n + 2)]
        diffs = ts
        for _ in range(n):
            diffs = [b - a for a, b in zip(diffs, diffs[1:])]
        assert not diffs[0].is_zero()
        assert (diffs[1] - diffs[0]).is_zero()


def test_resource_guard():
    with pytest.raises(ResourceExhausted):
        inductive_certificate(4, 1, 0, max_dimension=3)


def test_soundness_probe_agrees_and_detects():
    dag, e = inductive_certificate(2, 1, Fraction(1, 2))
    assert soundness_probe(e.target, 100, seed=3, evaluator=e.value, cross_checks=100) == []
    sp = IndeterminateSpace(["x"])
    assert len(soundness_probe(sp.var("x"), 50, seed=1)) > 0


@given(st.integers(1, 2), st.integers(1, 2), st.fractions(min_value=0, max_value=1, max_denominator=12))
def test_random_parameters_verify(n, k, frac):
    rho = frac * rho_star(k)
    dag, e = inductive_certificate(n, k, rho)
    assert verify_dag(dag, target=e.target, degree_bound=4 * k)


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=8, max_size=8))
def test_inequality_holds_at_points(vals):
    e = build_expectations(2, 1, Fraction(1, 2))
    ids = list(e.cube.f_vars.values()) + list(e.cube.g_vars.values())
    pt = dict(zip(ids, vals))
    assert e.value(pt) >= 0
    assert e.value(pt) == e.target.eval(pt)
