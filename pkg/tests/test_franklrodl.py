import copy
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypersos.certkit import verify_dag
from hypersos.franklrodl import (FRInstance, InfeasibleThreshold, RefutationConfig, apply_sd_direct,
                                 apply_sd_spectral, build_refutation, edges, feasible, krawtchouk,
                                 max_independent_set, min_refutable_density, min_refutable_density_search,
                                 parity_split, reflect, sd_eigenvalue, sd_eigenvalue_direct, spectral_gap,
                                 sprime_form, vertex_cover_certificate, weight)
from hypersos.reversecert import point_label, points

INSTANCES = [FRInstance(4, Fraction(1, 2)), FRInstance(6, Fraction(1, 3)), FRInstance(8, Fraction(1, 4))]


def test_instance_parameters():
    inst = FRInstance(6, Fraction(1, 3))
    assert (inst.d, inst.N, inst.k) == (4, 64, 1)
    assert inst.rho == Fraction(1, 3) and inst.rho_prime == Fraction(-1, 3)
    assert FRInstance(8, Fraction(1, 4)).k == 1
    for bad in [(5, Fraction(1, 2)), (4, Fraction(3, 4)), (4, Fraction(1, 3))]:
        with pytest.raises(ValueError):
            FRInstance(*bad)


def test_edge_count():
    for inst in INSTANCES[:2]:
        assert len(edges(inst)) == inst.N * comb(inst.n, inst.d) // 2


def test_eigenvalue_examples():
    for n, d in [(4, 2), (6, 4), (8, 6)]:
        assert sd_eigenvalue(n, d, 0) == 1
        assert sd_eigenvalue(n, d, 1) == 1 - Fraction(2 * d, n)
    assert sd_eigenvalue(4, 2, 2) == Fraction(-1, 3)
    assert spectral_gap(4, 2, 0).delta[1] == Fraction(-1, 4)
    assert krawtchouk(4, 0, 3) == 1
    with pytest.raises(ValueError):
        sd_eigenvalue(4, 5, 0)


@pytest.mark.parametrize("n,d", [(4, 2), (5, 2), (6, 4)])
def test_eigenvalues_direct(n, d):
    assert [sd_eigenvalue(n, d, j) for j in range(n + 1)] == [sd_eigenvalue_direct(n, d, j) for j in range(n + 1)]


@settings(max_examples=25)
@given(st.sampled_from([(3, 1), (4, 2), (5, 2)]), st.data())
def test_apply_sd_agrees(nd, data):
    n, d = nd
    vals = {x: Fraction(data.draw(st.integers(-9, 9)), data.draw(st.integers(1, 5))) for x in points(n)}
    assert apply_sd_direct(vals, n, d) == apply_sd_spectral(vals, n, d)


def test_spectral_thresholds():
    gaps = [spectral_gap(i.n, i.d) for i in INSTANCES]
    assert [g.delta_max for g in gaps] == [Fraction(1, 4), Fraction(86, 405), Fraction(87, 448)]
    assert all(g.delta_one_sided == g.delta_max for g in gaps)
    assert all(g.delta[0] == 0 for g in gaps)


def test_parity_parts():
    inst = INSTANCES[0]
    fv = {x: i for i, x in enumerate(points(inst.n))}
    f0, f1 = parity_split(fv)
    assert sum(v is not None for v in f0.values()) == sum(v is not None for v in f1.values()) == inst.N // 2
    assert all((f0[x] is None) == (weight(x) % 2 == 1) for x in fv)
    assert reflect(reflect(fv)) == fv


def test_min_alpha_closed_form_vs_search():
    got = [min_refutable_density(i) for i in INSTANCES]
    assert got == [Fraction(119, 100), Fraction(571, 500), Fraction(1117, 1000)]
    assert got == [min_refutable_density_search(i) for i in INSTANCES]
    assert got[0] >= got[1] >= got[2]
    for inst, a in zip(INSTANCES, got):
        assert feasible(inst, a) and not feasible(inst, a - Fraction(1, 1000))
        assert vertex_cover_certificate(inst) < 0
    assert min_refutable_density(INSTANCES[0], Fraction(1, 10)) == Fraction(6, 5)
    with pytest.raises(ValueError):
        min_refutable_density(INSTANCES[0], Fraction(2, 7))


@pytest.fixture(scope="module")
def fr4():
    return build_refutation(INSTANCES[0], RefutationConfig(Fraction(6, 5)))


def test_edge_zero_conclusion(fr4):
    sp = fr4.system.space
    fv = {x: sp.id(point_label("f", x)) for x in points(4)}
    f0, f1 = parity_split(fv)
    inst = fr4.inst
    assert fr4.dag.conclusion(fr4.steps["edge_zero"]) == sprime_form(sp, f0, inst) + sprime_form(sp, f1, inst)


def test_refutation_verifies(fr4):
    sp = fr4.system.space
    assert verify_dag(fr4.dag, target=sp.const(-1), degree_bound=4 * fr4.inst.k)
    assert fr4.dag.conclusion(fr4.dag.root) == sp.const(-1)


@pytest.mark.parametrize("mode", ["per_level", "max"])
def test_refutation_n6(mode):
    inst = INSTANCES[1]
    ref = build_refutation(inst, RefutationConfig(min_refutable_density(inst, mode=mode), spectral_mode=mode))
    assert verify_dag(ref.dag, target=ref.system.space.const(-1), degree_bound=4)


def test_infeasible_threshold():
    inst = INSTANCES[0]
    for alpha in (Fraction(9, 10), Fraction(1189, 1000)):
        with pytest.raises(InfeasibleThreshold) as e:
            build_refutation(inst, RefutationConfig(alpha))
        assert e.value.minimal == Fraction(119, 100) and e.value.alpha == alpha
    with pytest.raises(ValueError):
        RefutationConfig(Fraction(1), spectral_mode="other")


def test_removed_edge_axiom_fails(fr4):
    d = copy.deepcopy(fr4.dag)
    lab = next(l for l in d.system.equalities if l.startswith("edge:"))
    del d.system.equalities[lab]
    v = verify_dag(d, target=d.space.const(-1), degree_bound=4)
    assert not v and v.category == "unknown_label"


def test_max_independent_set_soundness():
    expect = {4: 4, 6: 12}
    for inst in INSTANCES[:2]:
        size, vs = max_independent_set(inst)
        assert size == expect[inst.n] == len(vs)
        es = set(edges(inst))
        assert not any((x, y) in es for x in vs for y in vs)
        assert Fraction(size, inst.N) < min_refutable_density(inst)
