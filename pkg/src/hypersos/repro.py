"""End-to-end reproduction checks, one function per acceptance criterion.

Each check returns a :class:`CheckResult`; ``run_all`` runs them (optionally
in worker processes) and is what ``hypersos repro all`` reports.
"""

from __future__ import annotations

import copy
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .certkit import ConstraintSystem, SOSCertificate, Term, verify_certificate, verify_dag
from .certkit.io import certificate_from_dict, certificate_to_dict
from .polycore import IndeterminateSpace


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(name: str, fn, limit: float | None = None) -> CheckResult:
    t = time.perf_counter()
    ok, detail, data = fn()
    dt = time.perf_counter() - t
    if limit is not None and dt > limit:
        ok, detail = False, detail + f"; runtime {dt:.1f}s over the {limit:.0f}s budget"
    return CheckResult(name, ok, detail, dt, data)


# --------------------------------------------------------------------------- 1

def _puzzle():
    from .twopoint import puzzle_check

    r = puzzle_check()
    ok = (r["weights"] == (Fraction(11, 24), Fraction(1, 24)) and r["residual_zero"]
          and r["squares_match_expression"] and r["nonneg_coefficients"] and r["certificate_valid"]
          and r["eval_1_2"][0] == r["eval_1_2"][1])
    return ok, f"weights {r['weights'][0]}, {r['weights'][1]}; residual zero {r['residual_zero']}", {}


def check_puzzle() -> CheckResult:
    return _timed("1 puzzle reproduction", _puzzle, limit=1.0)


# --------------------------------------------------------------------------- 2

def _twopoint():
    from .twopoint import TwoPointParams, rho_star, twopoint_certificate

    bad = []
    count = 0
    for k in range(1, 9):
        rs = rho_star(k)
        for rho in (Fraction(0), rs / 3, rs):
            cert = twopoint_certificate(TwoPointParams(k, rho))
            back, system = certificate_from_dict(certificate_to_dict(cert))
            v = verify_certificate(back, system, degree_bound=4 * k)
            count += 1
            if not v:
                bad.append((k, str(rho), v.category))
    return not bad, f"{count - len(bad)}/{count} certificates verify at degree 4k", {"failures": bad}


def check_twopoint() -> CheckResult:
    return _timed("2 two-point certificates", _twopoint, limit=120.0)


# --------------------------------------------------------------------------- 3

def _qfamily():
    from .twopoint import (TSPACE, build_P, check_Qtilde_recurrence, check_S_recurrence, compute_Q,
                           q_sum, qtilde_polys)

    t = TSPACE.var("t")
    facts = {
        "Q10": compute_Q(1).Q[0] == t ** 2,
        "Q20": compute_Q(2).Q[0] == t ** 4 + 14 * t ** 2,
        "sum": all(q_sum(compute_Q(k).Q) == build_P(k) for k in range(1, 9)),
        "Qtilde_kk": all(qtilde_polys(k)[k] == 1 for k in range(1, 11)),
        "S_rec": bool(check_S_recurrence(32)),
        "Qtilde_rec": bool(check_Qtilde_recurrence(10)),
    }
    failed = [k for k, v in facts.items() if not v]
    return not failed, "all Q-family identities exact" if not failed else f"failed: {failed}", facts


def check_qfamily() -> CheckResult:
    return _timed("3 Q-family facts", _qfamily)


# --------------------------------------------------------------------------- 4

def _sharpness():
    from .certkit import sturm_nonneg
    from .hypercert import MomentSequence, moment_bound, zfc_termwise_check
    from .twopoint import CertificateError, q_decomposition_squares, q_polys

    q10 = q_polys(1, Fraction(1, 4))[0]
    verdict = sturm_nonneg(q10)
    detected = not verdict.nonnegative
    try:
        q_decomposition_squares(1, Fraction(1, 4))
        detected = False
    except CertificateError:
        pass
    misses = []
    for s in range(1, 7):
        base = [moment_bound(s, j) for j in range(1, s + 1)]
        for j in range(1, s + 1):
            ms = list(base)
            ms[j - 1] += Fraction(1, 1000)
            v = zfc_termwise_check(s, Fraction(1, 2 * s - 1), MomentSequence(s, tuple(ms)))
            if v or v.node != j:
                misses.append((s, j))
    ok = detected and not misses
    return ok, f"rho=1/4 probe detected {detected}; termwise misses {misses}", {}


def check_sharpness() -> CheckResult:
    return _timed("4 sharpness probes", _sharpness)


# --------------------------------------------------------------------------- 5

REVERSE_CASES = ((1, 1), (2, 1), (2, 2), (3, 1), (3, 2))


def _reverse(points_per_case: int = 500):
    from .reversecert import inductive_certificate, soundness_probe
    from .twopoint import rho_star

    bad = []
    for n, k in REVERSE_CASES:
        for rho in (rho_star(k), Fraction(0)):
            dag, exp = inductive_certificate(n, k, rho)
            v = verify_dag(dag, target=exp.target, degree_bound=4 * k)
            leaves = len(dag.leaves())
            viol = soundness_probe(exp.target, points_per_case, seed=n * 100 + k, evaluator=exp.value)
            if not v or leaves != 4 ** (n - 1) or viol:
                bad.append((n, k, str(rho), v.category, leaves, len(viol)))
    n_cases = 2 * len(REVERSE_CASES)
    return not bad, f"{n_cases - len(bad)}/{n_cases} DAGs verify with 4^(n-1) leaves, no probe violations", \
        {"failures": bad}


def check_reverse() -> CheckResult:
    return _timed("5 reverse hypercontractivity", _reverse, limit=300.0)


# --------------------------------------------------------------------------- 6

def _forward():
    from .hypercert import amgm_lemma_certificate, binomial_identity_check, check_remark_product_form, hypercon_certificate

    facts = {"binomial": bool(binomial_identity_check(100)), "remark": bool(check_remark_product_form(20))}
    facts["amgm"] = all(bool(verify_certificate(amgm_lemma_certificate(v))) for v in (2, 4, 6, 8))
    dag, target = hypercon_certificate(2, 2, Fraction(1, 3))
    facts["dag"] = bool(verify_dag(dag, target=target, degree_bound=4))
    failed = [k for k, v in facts.items() if not v]
    return not failed, "forward checks exact" if not failed else f"failed: {failed}", facts


def check_forward() -> CheckResult:
    return _timed("6 forward hypercontractivity", _forward)


# --------------------------------------------------------------------------- 7

FR_CASES = ((4, Fraction(1, 2)), (6, Fraction(1, 3)), (8, Fraction(1, 4)))


def _frankl_rodl(cases=FR_CASES):
    from .franklrodl import (FRInstance, InfeasibleThreshold, RefutationConfig, build_refutation,
                             max_independent_set, min_refutable_density, min_refutable_density_search,
                             spectral_gap)

    rows = []
    failed = []
    for n, g in cases:
        inst = FRInstance(n, g)
        gap, gap_direct = spectral_gap(n, inst.d), spectral_gap(n, inst.d, direct=True)
        same = gap.delta == gap_direct.delta and gap.lambda_Sd == gap_direct.lambda_Sd
        alpha = min_refutable_density(inst)
        agree = alpha == min_refutable_density_search(inst)
        ref = build_refutation(inst, RefutationConfig(alpha))
        space = ref.system.space
        ok = bool(verify_dag(ref.dag, target=space.const(-1), degree_bound=4 * inst.k))
        try:
            build_refutation(inst, RefutationConfig(alpha - Fraction(1, 1000)))
            below = False
        except InfeasibleThreshold as e:
            below = e.minimal == alpha
        sound = True
        if n <= 6:
            size, _ = max_independent_set(inst)
            sound = Fraction(size, inst.N) < alpha
        row = dict(n=n, gamma=str(g), delta_max=str(gap.delta_max), alpha=str(alpha), nodes=len(ref.dag))
        rows.append(row)
        if not (same and agree and ok and below and sound):
            failed.append((n, str(g), same, agree, ok, below, sound))
    detail = "; ".join(f"n={r['n']}: alpha_min={r['alpha']}, {r['nodes']} nodes" for r in rows)
    return not failed, detail if not failed else f"failed: {failed}", {"rows": rows}


def check_frankl_rodl() -> CheckResult:
    return _timed("7 Frankl-Rodl pipeline", _frankl_rodl, limit=600.0)


# --------------------------------------------------------------------------- 8

def _toy_system():
    """``x^2 - x = 0``, ``y >= 0`` and a certificate of ``1 - x + 2y >= 0``."""
    sp = IndeterminateSpace(["x", "y"])
    x, y = sp.var("x"), sp.var("y")
    system = ConstraintSystem(sp)
    system.add_eq("bool:x", x * x - x)
    system.add_ineq("q", y)
    cert = SOSCertificate(1 - x + 2 * y, u0=[(Fraction(1), 1 - x)],
                          ineq_multipliers={"q": [(Fraction(2), sp.const(1))]},
                          eq_multipliers={"bool:x": sp.const(-1)}, degree_bound=2)
    return cert, system


def _cert_mutants():
    from .twopoint import TwoPointParams, twopoint_certificate

    out = []
    sources = [(twopoint_certificate(TwoPointParams(k, r)), None)
               for k, r in ((1, Fraction(1, 2)), (2, Fraction(3, 4)), (3, Fraction(5, 6)), (2, Fraction(0)))]
    toy, toy_sys = _toy_system()
    for idx, (cert, system) in enumerate(sources):
        k = cert.degree_bound
        for pos in (0, len(cert.u0) - 1):
            c = copy.copy(cert)
            c.u0 = list(cert.u0)
            coef, s = c.u0[pos]
            c.u0[pos] = (coef + Fraction(1, 7), s)
            out.append((f"cert{idx} coefficient +1/7 at square {pos}", "residual", c, system, None))
        c = copy.copy(cert)
        c.u0 = list(cert.u0)
        coef, s = c.u0[0]
        c.u0[0] = (-coef if coef else Fraction(-1), s)
        out.append((f"cert{idx} negated coefficient", "negative_coefficient", c, system, None))
        out.append((f"cert{idx} degree bound {k - 1}", "degree", cert, system, k - 1))
        c = copy.copy(cert)
        c.u0 = cert.u0[1:]
        out.append((f"cert{idx} dropped square", "residual", c, system, None))
        c = copy.copy(cert)
        c.u0 = list(cert.u0)
        coef, s = c.u0[-1]
        c.u0[-1] = (coef, s + 1)
        out.append((f"cert{idx} perturbed square root", "residual", c, system, None))
    sp = toy.space
    for lab in ("bool:x",):
        c = copy.copy(toy)
        c.eq_multipliers = {}
        out.append(("toy dropped equality multiplier", "residual", c, toy_sys, None))
        c = copy.copy(toy)
        c.eq_multipliers = {"bool:z": sp.const(-1)}
        out.append(("toy unknown equality label", "unknown_label", c, toy_sys, None))
        c = copy.copy(toy)
        c.eq_multipliers = {lab: sp.var("x")}
        out.append(("toy equality multiplier too large", "degree", c, toy_sys, None))
    c = copy.copy(toy)
    c.ineq_multipliers = {}
    out.append(("toy dropped inequality multiplier", "residual", c, toy_sys, None))
    c = copy.copy(toy)
    c.ineq_multipliers = {"q": [(Fraction(-2), sp.const(1))]}
    out.append(("toy negative inequality multiplier", "negative_coefficient", c, toy_sys, None))
    c = copy.copy(toy)
    c.ineq_multipliers = {"r": [(Fraction(2), sp.const(1))]}
    out.append(("toy unknown inequality label", "unknown_label", c, toy_sys, None))
    c = copy.copy(toy)
    c.ineq_multipliers = {"q": [(Fraction(2), sp.var("x"))]}
    out.append(("toy inequality multiplier degree", "degree", c, toy_sys, None))
    return out


def _dag_mutants():
    from .franklrodl import FRInstance, RefutationConfig, build_refutation
    from .reversecert import inductive_certificate

    out = []
    rdag, exp = inductive_certificate(2, 1, Fraction(1, 2))
    fr = build_refutation(FRInstance(4, Fraction(1, 2)), RefutationConfig(Fraction(6, 5)))
    sources = [("reverse", rdag, exp.target, 4), ("fr", fr.dag, fr.system.space.const(-1), 4)]
    for name, dag, target, deg in sources:
        combos = [i for i, nd in enumerate(dag.nodes) if nd.rule == "NonnegCombination" and nd.terms]
        ge = [i for i in combos if any(dag.nodes[t.child].rel == ">=0" for t in dag.nodes[i].terms)]
        with_eq = [i for i in combos if dag.nodes[i].eq_multipliers]
        for i in (ge[0], ge[-1]):
            d = copy.deepcopy(dag)
            t = d.nodes[i].terms[0]
            d.nodes[i].terms[0] = Term(t.child, t.coeff * 2 + 1, t.sos, t.poly, t.subst)
            out.append((f"{name} node {i} weight tweak", "residual", d, target, deg))
        d = copy.deepcopy(dag)
        idx = next(j for j, t in enumerate(d.nodes[ge[-1]].terms) if d.nodes[t.child].rel == ">=0")
        t = d.nodes[ge[-1]].terms[idx]
        d.nodes[ge[-1]].terms[idx] = Term(t.child, -t.coeff, t.sos, t.poly, t.subst)
        out.append((f"{name} negative weight on inequality", "negative_coefficient", d, target, deg))
        if with_eq:
            d = copy.deepcopy(dag)
            node = d.nodes[with_eq[-1]]
            lab = next(iter(node.eq_multipliers))
            node.eq_multipliers = {k: v for k, v in node.eq_multipliers.items() if k != lab}
            out.append((f"{name} dropped equality multiplier", "residual", d, target, deg))
        out.append((f"{name} degree bound {deg - 1}", "degree", dag, target, deg - 1))
        d = copy.deepcopy(dag)
        leaf = d.nodes[d.leaves()[0]]
        cert = copy.copy(leaf.cert)
        cert.u0 = [(c + 1, s) for c, s in cert.u0] or [(Fraction(1), d.space.const(1))]
        leaf.cert = cert
        out.append((f"{name} leaf coefficient tweak", "residual", d, target, deg))
        d = copy.deepcopy(dag)
        d.nodes[ge[0]].terms[0] = Term(10 ** 6)
        d.nodes[ge[0]].children = (10 ** 6,) + d.nodes[ge[0]].children[1:]
        out.append((f"{name} dangling child", "dangling", d, target, deg))
        d = copy.deepcopy(dag)
        i = ge[0]
        d.nodes[i].children = d.nodes[i].children + (d.root,)
        d.nodes[i].terms = d.nodes[i].terms + [Term(d.root, Fraction(0))]
        out.append((f"{name} cycle through root", "cycle", d, target, deg))
    # axiom removal in the refutation
    d = copy.deepcopy(fr.dag)
    system = d.system
    lab = next(iter(l for l in system.equalities if l.startswith("edge:")))
    del system.equalities[lab]
    out.append(("fr removed edge axiom", "unknown_label", d, d.space.const(-1), 4))
    d = copy.deepcopy(fr.dag)
    j = fr.steps["powers"]
    d.nodes[j].coeff = -d.nodes[j].coeff
    out.append(("fr powers lemma with negative constant", "negative_coefficient", d, d.space.const(-1), 4))
    d = copy.deepcopy(fr.dag)
    j = fr.steps["reflect"]
    c, fs = d.nodes[j].expr[-1]
    d.nodes[j].expr[-1] = (c * 2, fs)
    out.append(("fr reflection identity tampered", "residual", d, d.space.const(-1), 4))
    return out


def adversarial_suite() -> list[tuple[str, str, str | None]]:
    """``(mutation, expected category, reported category)`` for every mutant."""
    results = []
    for name, expected, cert, system, deg in _cert_mutants():
        v = verify_certificate(cert, system, degree_bound=deg)
        results.append((name, expected, None if v else v.category))
    for name, expected, dag, target, deg in _dag_mutants():
        v = verify_dag(dag, target=target, degree_bound=deg)
        results.append((name, expected, None if v else v.category))
    return results


def _adversarial():
    res = adversarial_suite()
    wrong = [r for r in res if r[1] != r[2]]
    return len(res) >= 50 and not wrong, f"{len(res) - len(wrong)}/{len(res)} mutants rejected with the right category", \
        {"wrong": wrong}


def check_adversarial() -> CheckResult:
    return _timed("8 verifier adversarial suite", _adversarial)


CHECKS = {
    "puzzle": check_puzzle,
    "twopoint": check_twopoint,
    "qfamily": check_qfamily,
    "sharpness": check_sharpness,
    "reverse": check_reverse,
    "forward": check_forward,
    "frankl_rodl": check_frankl_rodl,
    "adversarial": check_adversarial,
}


def _run_one(name: str) -> CheckResult:
    return CHECKS[name]()


def run_all(jobs: int = 1, only=None) -> list[CheckResult]:
    names = [n for n in CHECKS if only is None or n in only]
    if jobs <= 1:
        return [_run_one(n) for n in names]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_run_one, names))
