import copy
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypersos.certkit import (ConstraintSystem, DecompositionError, ProofDAG, RuleError, SOSCertificate, Term,
                              bivariate_homog_sos_decompose, isolate_real_roots, ldl_psd, sos_value, sturm_nonneg,
                              univariate_sos_decompose, verify_certificate, verify_dag)
from hypersos.certkit.io import MalformedInput, certificate_from_dict, certificate_to_dict, dag_from_dict, dag_to_dict
from hypersos.polycore import IndeterminateSpace, SparsePoly

T = IndeterminateSpace(["t"])
t = T.var("t")


def test_sturm_decides_simple_cases():
    assert sturm_nonneg(t ** 2)
    assert sturm_nonneg((t - 1) ** 2 * (t ** 2 + 1))
    v = sturm_nonneg(t ** 2 - t)
    assert not v and v.witness_point is not None
    assert (v.witness_point ** 2 - v.witness_point) < 0
    assert not sturm_nonneg(t ** 3)


def test_root_isolation_counts():
    p = ((t - 1) * (t + 2) * (3 * t - 1)).to_coeffs()
    iv = isolate_real_roots(p)
    assert len(iv) == 3
    roots = [Fraction(1), Fraction(-2), Fraction(1, 3)]
    for r in roots:
        assert sum(lo <= r <= hi for lo, hi in iv) == 1


def test_univariate_sos_of_nonnegative():
    p = t ** 4 - 2 * t ** 3 + 3 * t ** 2 - 2 * t + 2
    parts = univariate_sos_decompose(p)
    assert all(c >= 0 for c, _ in parts)
    assert sos_value(parts, T) == p


def test_univariate_sos_refuses_negative():
    with pytest.raises(DecompositionError):
        univariate_sos_decompose(t ** 2 - t)


def test_bivariate_form():
    sp = IndeterminateSpace(["X", "Y"])
    X, Y = sp.var("X"), sp.var("Y")
    form = (X ** 4 + Y ** 4) / 2 - ((X + Y) / 2) ** 4
    parts = bivariate_homog_sos_decompose(form, "X", "Y")
    assert sos_value(parts, sp) == form and all(c >= 0 for c, _ in parts)


def test_ldl_psd():
    L, D = ldl_psd([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(2)]])
    assert all(d >= 0 for d in D)
    assert ldl_psd([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(1)]]) is None


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=1, max_size=3),
       st.fractions(min_value=0, max_value=2, max_denominator=4))
def test_products_of_shifted_squares_decompose(roots, c):
    p = T.const(c)
    for r in roots:
        p = p + (t - r) ** 2 * (t ** 2 + 1)
    parts = univariate_sos_decompose(p)
    assert sos_value(parts, T) == p and all(c >= 0 for c, _ in parts)


# --------------------------------------------------------------------- certificates

def toy():
    sp = IndeterminateSpace(["x", "y"])
    x, y = sp.var("x"), sp.var("y")
    system = ConstraintSystem(sp)
    system.add_eq("bool:x", x * x - x)
    system.add_ineq("q", y)
    cert = SOSCertificate(1 - x + 2 * y, u0=[(Fraction(1), 1 - x)],
                          ineq_multipliers={"q": [(Fraction(2), sp.const(1))]},
                          eq_multipliers={"bool:x": sp.const(-1)}, degree_bound=2)
    return sp, system, cert


def test_certificate_verifies_and_categories():
    sp, system, cert = toy()
    assert verify_certificate(cert, system)
    assert verify_certificate(cert, system, degree_bound=1).category == "degree"
    bad = copy.copy(cert)
    bad.u0 = [(Fraction(-1), 1 - sp.var("x"))]
    assert verify_certificate(bad, system).category == "negative_coefficient"
    bad.u0 = [(Fraction(2), 1 - sp.var("x"))]
    v = verify_certificate(bad, system)
    assert v.category == "residual" and "leading term" in v.detail


def test_certificate_round_trip():
    sp, system, cert = toy()
    d = certificate_to_dict(cert, system)
    back, sys2 = certificate_from_dict(d)
    assert certificate_to_dict(back, sys2) == d
    assert verify_certificate(back, sys2)
    with pytest.raises(MalformedInput):
        certificate_from_dict({"format": "nope"})


# --------------------------------------------------------------------- DAG rules

def test_dag_rules_and_round_trip():
    sp, system, cert = toy()
    x, y = sp.var("x"), sp.var("y")
    dag = ProofDAG(system)
    q = dag.axiom("q")
    b = dag.axiom("bool:x")
    sq = dag.square(x - y, Fraction(3))
    leaf = dag.leaf(cert)
    comb = dag.combine([Term(q, coeff=2), Term(sq), Term(leaf), Term(b, poly=x)])
    prod = dag.product_with_sos(q, [(Fraction(1), x)])
    ident = dag.identity(comb, [(1, [dag.conclusion(comb)])])
    pw = dag.powers(q, Fraction(1), 3)
    assert dag.conclusion(pw) == (y + 1) ** 3 - 1
    scs = dag.super_cs(x, y, 2)
    sub = dag.substitute(scs, {"x": y})
    dag.root = dag.combine([Term(ident), Term(prod), Term(pw), Term(sub)])
    assert verify_dag(dag)
    back = dag_from_dict(dag_to_dict(dag))
    assert verify_dag(back) and dag_to_dict(back) == dag_to_dict(dag)


def test_dag_construction_rejects_bad_steps():
    sp, system, cert = toy()
    x = sp.var("x")
    dag = ProofDAG(system)
    q = dag.axiom("q")
    with pytest.raises(RuleError):
        dag.combine([Term(q, coeff=-1)])
    with pytest.raises(RuleError):
        dag.combine([Term(q, poly=x)])  # polynomial multiplier on an inequality
    with pytest.raises(RuleError):
        dag.axiom("missing")
    with pytest.raises(RuleError):
        dag.substitute(q, {"y": x})  # alters the axiom y >= 0
    with pytest.raises(RuleError):
        dag.identity(q, [(2, [sp.var("y")])])


def test_substitution_sending_axiom_to_zero_discharges_it():
    sp = IndeterminateSpace(["m", "x"])
    m, x = sp.var("m"), sp.var("x")
    system = ConstraintSystem(sp)
    system.add_eq("def:m", m - x)
    dag = ProofDAG(system)
    e = dag.axiom("def:m")
    sq = dag.square(m)
    c = dag.combine([Term(sq), Term(e, poly=-(m + x))])  # m^2 - (m^2 - x^2) = x^2
    s = dag.substitute(c, {"m": x})
    dag.root = s
    assert verify_dag(dag, target=x * x)


def test_verify_reports_cycle_and_dangling():
    sp, system, cert = toy()
    dag = ProofDAG(system)
    a = dag.axiom("q")
    c = dag.combine([Term(a)])
    dag.root = c
    d = copy.deepcopy(dag)
    d.nodes[c].children = (c,)
    d.nodes[c].terms = [Term(c)]
    assert verify_dag(d).category == "cycle"
    d = copy.deepcopy(dag)
    d.nodes[c].children = (7,)
    assert verify_dag(d).category == "dangling"
    d = copy.deepcopy(dag)
    d.root = None
    assert verify_dag(d).category == "dangling"
