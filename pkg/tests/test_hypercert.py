import itertools
import random
from fractions import Fraction
from math import comb, prod

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypersos.certkit import ResourceExhausted, verify_certificate, verify_dag
from hypersos.hypercert import (FourierIndeterminates, HyperBuilder, MomentSequence, amgm_lemma_certificate,
                                binomial_identity_check, check_remark_product_form, double_factorial,
                                hypercon_certificate, low_degree_corollary, moment_bound, remark_product_form,
                                subset_label, zfc_termwise_check)


def test_moment_bound_values():
    assert moment_bound(2, 1) == 1
    assert moment_bound(2, 2) == 9
    assert moment_bound(1, 1) == 1
    assert moment_bound(3, 2) == 5
    for s in range(1, 8):
        assert moment_bound(s, s) == (2 * s - 1) ** s
    with pytest.raises(ValueError):
        moment_bound(2, 3)
    with pytest.raises(ValueError):
        moment_bound(2, 0)


def test_product_form_and_examples():
    assert remark_product_form(2, 2) == 9
    assert all(remark_product_form(s, 1) == 1 for s in range(1, 10))
    assert check_remark_product_form(25)
    with pytest.raises(ValueError):
        check_remark_product_form(0)


def test_moment_sequences():
    g = MomentSequence.gaussian(4)
    assert g.even_moments == (1, 3, 15, 105) == tuple(double_factorial(2 * j - 1) for j in range(1, 5))
    assert g.satisfies_conditions() and MomentSequence.rademacher(4).satisfies_conditions()
    assert g.moment(3) == 0 and g.moment(0) == 1
    assert not MomentSequence(2, (1, 10)).satisfies_conditions()
    with pytest.raises(ValueError):
        MomentSequence(2, (1,))
    with pytest.raises(ValueError):
        MomentSequence(2, (1, 0))


def test_termwise_examples():
    assert zfc_termwise_check(2, Fraction(1, 3), MomentSequence.rademacher(2))
    v = zfc_termwise_check(2, Fraction(1, 3), MomentSequence(2, (1, 9)))
    assert v and "2" in v.detail
    v = zfc_termwise_check(2, Fraction(1, 3), MomentSequence(2, (1, 10)))
    assert not v and v.node == 2
    with pytest.raises(ValueError):
        zfc_termwise_check(2, Fraction(1, 2), MomentSequence.rademacher(2))


def test_extremal_bound_is_tight_everywhere():
    for s in range(1, 7):
        ext = MomentSequence(s, tuple(moment_bound(s, j) for j in range(1, s + 1)))
        v = zfc_termwise_check(s, Fraction(1, 2 * s - 1), ext)
        assert v and v.detail == "tight at j in " + str(list(range(s + 1)))


@pytest.mark.parametrize("s", range(1, 7))
def test_sharpness_fails_at_exactly_j(s):
    base = [moment_bound(s, j) for j in range(1, s + 1)]
    for j in range(1, s + 1):
        for eps in (Fraction(1, 1000), Fraction(1)):
            ms = list(base)
            ms[j - 1] += eps
            v = zfc_termwise_check(s, Fraction(1, 2 * s - 1), MomentSequence(s, tuple(ms)))
            assert not v and v.node == j


@given(st.integers(1, 6), st.lists(st.fractions(Fraction(1, 50), Fraction(200), max_denominator=50),
                                    min_size=6, max_size=6))
def test_termwise_agrees_with_conditions(s, ms):
    seq = MomentSequence(s, tuple(ms[:s]))
    assert bool(zfc_termwise_check(s, Fraction(1, 2 * s - 1), seq)) == seq.satisfies_conditions()


def test_binomial_identity():
    assert binomial_identity_check(100)
    s, r = 2, 1
    lhs = sum(Fraction(4 ** v, comb(2 * v, v)) * comb(r, v) * comb(s - r, v) for v in range(r + 1))
    assert lhs == 3 == Fraction(comb(4, 2), comb(2, 1))


@pytest.mark.parametrize("v,squares", [(2, 1), (4, 3), (6, 10)])
def test_amgm_structure(v, squares):
    cert = amgm_lemma_certificate(v)
    assert verify_certificate(cert)
    assert len(cert.u0) == squares == comb(v, v // 2) // 2
    assert cert.degree_bound == 2 * v


def test_amgm_v2_explicit_and_equality():
    cert = amgm_lemma_certificate(2)
    sp = cert.space
    G1, G2, H1, H2 = (sp.var(x) for x in ("G1", "G2", "H1", "H2"))
    assert cert.target == (G1 ** 2 * H2 ** 2 + G2 ** 2 * H1 ** 2) / 2 - G1 * H1 * G2 * H2
    assert cert.target.eval({"G1": 1, "G2": 1, "H1": 1, "H2": 1}) == 0
    with pytest.raises(ValueError):
        amgm_lemma_certificate(3)


@pytest.mark.parametrize("v", [2, 4, 6, 8])
def test_amgm_random_points(v):
    cert = amgm_lemma_certificate(v)
    rng = random.Random(v)
    labels = [f"G{i}" for i in range(1, v + 1)] + [f"H{i}" for i in range(1, v + 1)]
    for _ in range(500):
        pt = {x: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for x in labels}
        assert cert.target.eval(pt) >= 0


def test_norm_split_identity():
    fi = FourierIndeterminates(3, 2)
    for i in (1, 2):
        for m in range(1, 4):
            tails = [frozenset(c) for r in range(4 - m) for c in itertools.combinations(range(m + 1, 4), r)]
            for t in tails:
                assert fi.norm_sq(i, m, t) == fi.norm_sq(i, m - 1, t) + fi.norm_sq(i, m - 1, t | {m})


def _oracle(n, s, rho, point):
    """``prod E f_i^2 - E prod (T f_i)^2`` by enumeration over the cube."""
    subsets = [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(1, n + 1), r)]
    rhs = prod(sum(point[subset_label(i, S)] ** 2 for S in subsets) for i in range(1, s + 1))
    lhs = Fraction(0)
    for x in itertools.product((1, -1), repeat=n):
        vals = [sum(rho ** len(S) * point[subset_label(i, S)] * prod(x[j - 1] for j in S) for S in subsets)
                for i in range(1, s + 1)]
        lhs += prod(v * v for v in vals)
    return rhs - lhs / 2 ** n


@pytest.mark.parametrize("n,s,rho", [(1, 1, Fraction(1)), (1, 2, Fraction(1, 2)), (2, 1, Fraction(2, 3)),
                                     (2, 2, Fraction(1, 2)), (2, 2, Fraction(1, 3))])
def test_target_matches_enumeration(n, s, rho):
    dag, target = hypercon_certificate(n, s, rho * rho)
    assert verify_dag(dag, target=target, degree_bound=2 * s)
    rng = random.Random(n * 10 + s)
    labels = target.space.labels
    for _ in range(20):
        pt = {x: Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for x in labels}
        assert target.eval(pt) == _oracle(n, s, rho, pt)


def test_trivial_cases():
    dag, target = hypercon_certificate(0, 2, Fraction(1, 3))
    assert target.is_zero() and verify_dag(dag, target=target, degree_bound=4)
    dag, target = hypercon_certificate(1, 1, 1)
    assert target.is_zero() and verify_dag(dag, target=target, degree_bound=2)


@pytest.mark.parametrize("n,s,rho_sq", [(0, 2, Fraction(1, 3)), (1, 2, Fraction(1, 3)), (2, 2, Fraction(1, 3)),
                                        (2, 3, Fraction(1, 5)), (2, 2, Fraction(1, 4))])
def test_dags_verify(n, s, rho_sq):
    dag, target = hypercon_certificate(n, s, rho_sq)
    assert verify_dag(dag, target=target, degree_bound=2 * s)
    assert not verify_dag(dag, target=target, degree_bound=2 * s - 1) or target.degree() < 2 * s


def test_gaussian_moments_dag():
    dag, target = hypercon_certificate(2, 2, Fraction(1, 3), MomentSequence.gaussian(2))
    assert verify_dag(dag, target=target, degree_bound=4)


def test_wrong_target_rejected():
    dag, target = hypercon_certificate(2, 2, Fraction(1, 3))
    sp = target.space
    bumped = target + sp.var(sp.labels[0]) ** 4 / 100
    assert not verify_dag(dag, target=bumped, degree_bound=4)


def test_builder_rejections():
    with pytest.raises(ValueError):
        HyperBuilder(1, 2, Fraction(1, 2), MomentSequence.rademacher(2))
    with pytest.raises(ValueError):
        HyperBuilder(1, 2, Fraction(1, 3), MomentSequence(2, (1, 10)))
    with pytest.raises(ResourceExhausted):
        HyperBuilder(6, 2, Fraction(1, 3), MomentSequence.rademacher(2))


def test_low_degree_corollary():
    dag, root, target = low_degree_corollary(2, 2, Fraction(1, 2), 1)
    assert verify_dag(dag, target=target, degree_bound=4)
    names = {x for mono in target.terms for x in mono[::2]}
    assert all(target.space.label(v).startswith("f1[") and v != target.space.id("f1[1,2]") for v in names)
