"""Proof DAGs: compositions of locally checkable SOS inference steps.

Every node states a conclusion ``p >= 0`` or ``p = 0``.  The verifier
re-derives each conclusion from the node's children with the rule named by
the node and compares exactly.  Degrees compose as in the flattened proof:
multiplying a degree-``D`` derivation by a multiplier of degree ``m`` gives
degree ``D + m``, and affine substitutions never raise the degree.

Substitutions are only sound if they leave every axiom used below them
unchanged or send it to zero; this is checked per axiom label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..polycore import NEG_INF, IndeterminateSpace, PolyError, SparsePoly, lincomb
from .cert import (CYCLE, DANGLING, DEGREE, MALFORMED, NEGATIVE, RESIDUAL, RULE, SPACE,
                   SUBSTITUTION, UNKNOWN_LABEL, ConstraintSystem, SOSCertificate, Verdict,
                   sos_degree, verify_certificate)
from .sos import bivariate_homog_sos_decompose, sos_value

GE, EQ = ">=0", "=0"


class RuleError(Exception):
    def __init__(self, category: str, detail: str):
        super().__init__(detail)
        self.category = category
        self.detail = detail


@dataclass
class Term:
    """One summand ``coeff * (sum c s^2) * poly * sigma(child)`` of a combination."""

    child: int
    coeff: Fraction = Fraction(1)
    sos: list | None = None
    poly: SparsePoly | None = None
    subst: int | None = None  # index into ProofDAG.substitutions


@dataclass
class Node:
    rule: str
    conclusion: SparsePoly
    rel: str
    children: tuple = ()
    # rule payloads (only the relevant ones are set)
    label: str | None = None
    poly: SparsePoly | None = None
    coeff: Fraction | None = None
    cert: SOSCertificate | None = None
    terms: list = field(default_factory=list)
    eq_multipliers: dict = field(default_factory=dict)
    subst: int | None = None
    expr: list | None = None
    exponent: int | None = None
    x: SparsePoly | None = None
    y: SparsePoly | None = None
    k: int | None = None
    note: str = ""


RULES = ("Axiom", "Square", "Leaf", "NonnegCombination", "ProductWithSOS",
         "SubstituteLinear", "PolynomialIdentity", "PowersLemma", "SuperCSLemma")

_SUPER_CS_CACHE: dict[int, bool] = {}


def super_cs_form(k: int) -> tuple[IndeterminateSpace, SparsePoly, list]:
    """The bivariate form ``(X^2k + Y^2k)/2 - ((X+Y)/2)^2k`` and its SOS."""
    sp = IndeterminateSpace(["X", "Y"])
    X, Y = sp.var("X"), sp.var("Y")
    form = (X ** (2 * k) + Y ** (2 * k)) / 2 - ((X + Y) / 2) ** (2 * k)
    return sp, form, bivariate_homog_sos_decompose(form, "X", "Y")


def _super_cs_checked(k: int) -> bool:
    hit = _SUPER_CS_CACHE.get(k)
    if hit is None:
        sp, form, parts = super_cs_form(k)
        hit = sos_value(parts, sp) == form and all(c >= 0 for c, _ in parts)
        _SUPER_CS_CACHE[k] = hit
    return hit


class ProofDAG:
    """Append-only list of inference nodes over one constraint system."""

    def __init__(self, system: ConstraintSystem):
        self.system = system
        self.space = system.space
        self.nodes: list[Node] = []
        self.substitutions: list[dict[int, SparsePoly]] = []
        self.root: int | None = None
        self._degree: list = []
        self._axioms: list[frozenset] = []
        self._cache: dict = {}

    # construction -------------------------------------------------------------
    def _push(self, node: Node) -> int:
        for c in node.children:
            if not 0 <= c < len(self.nodes):
                raise RuleError(DANGLING, f"child {c} does not exist yet")
        ctx = _Context(self)
        poly, rel, deg, used = derive(node, ctx, self.system, self.substitutions, self._cache)
        node.conclusion, node.rel = poly, rel
        self.nodes.append(node)
        nid = len(self.nodes) - 1
        self._degree.append(deg)
        self._axioms.append(used)
        return nid

    def add_substitution(self, sigma: dict) -> int:
        clean = {}
        for v, p in sigma.items():
            if not isinstance(p, SparsePoly):
                p = SparsePoly.constant(self.space, p)
            clean[self.space.id(v)] = p
        self.substitutions.append(clean)
        return len(self.substitutions) - 1

    def axiom(self, label: str) -> int:
        return self._push(Node("Axiom", None, None, label=label))

    def square(self, s: SparsePoly, coeff: Fraction = Fraction(1)) -> int:
        return self._push(Node("Square", None, None, poly=s, coeff=Fraction(coeff)))

    def leaf(self, cert: SOSCertificate, note: str = "") -> int:
        return self._push(Node("Leaf", None, None, cert=cert, note=note))

    def combine(self, terms: Sequence[Term], eq_multipliers: dict | None = None, note: str = "",
                rule: str = "NonnegCombination") -> int:
        terms = list(terms)
        return self._push(Node(rule, None, None, children=tuple(t.child for t in terms), terms=terms,
                               eq_multipliers=dict(eq_multipliers or {}), note=note))

    def product_with_sos(self, child: int, sos: list, note: str = "") -> int:
        return self.combine([Term(child, sos=sos)], note=note, rule="ProductWithSOS")

    def substitute(self, child: int, sigma: int | dict, note: str = "") -> int:
        if isinstance(sigma, dict):
            sigma = self.add_substitution(sigma)
        return self._push(Node("SubstituteLinear", None, None, children=(child,), subst=sigma, note=note))

    def identity(self, child: int, expr: list, note: str = "") -> int:
        """Restate ``child`` through an unexpanded sum-of-products ``expr``."""
        return self._push(Node("PolynomialIdentity", None, None, children=(child,), expr=expr, note=note))

    def powers(self, child: int, c: Fraction, exponent: int, note: str = "") -> int:
        return self._push(Node("PowersLemma", None, None, children=(child,), coeff=Fraction(c),
                               exponent=exponent, note=note))

    def super_cs(self, x: SparsePoly, y: SparsePoly, k: int, note: str = "") -> int:
        return self._push(Node("SuperCSLemma", None, None, x=x, y=y, k=k, note=note))

    # queries -------------------------------------------------------------------
    def conclusion(self, nid: int) -> SparsePoly:
        return self.nodes[nid].conclusion

    def degree(self, nid: int | None = None):
        if nid is None:
            nid = self.root
        return self._degree[nid]

    def leaves(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.rule == "Leaf"]

    def __len__(self) -> int:
        return len(self.nodes)


class _Context:
    """Conclusion / degree / axiom lookup used while deriving a node."""

    def __init__(self, dag: ProofDAG, concl=None, degree=None, axioms=None):
        self.dag = dag
        self._concl = concl
        self._deg = degree if degree is not None else dag._degree
        self._ax = axioms if axioms is not None else dag._axioms

    def concl(self, i: int) -> tuple[SparsePoly, str]:
        if self._concl is not None:
            return self._concl[i]
        n = self.dag.nodes[i]
        return n.conclusion, n.rel

    def degree(self, i: int):
        return self._deg[i]

    def axioms(self, i: int) -> frozenset:
        return self._ax[i]


def _substitution_sound(sigma: dict, sid: int, labels: frozenset, system: ConstraintSystem,
                        cache: dict) -> tuple[str | None, frozenset]:
    """First axiom that ``sigma`` alters (or None) and the axioms still in use.

    An axiom sent to zero becomes ``0 = 0`` (or ``0 >= 0``) and is discharged.
    """
    alive = []
    for lab in labels:
        key = (sid, lab)
        state = cache.get(key)
        if state is None:
            poly, _ = system.get(lab)
            if not (poly.variables() & set(sigma)):
                state = "kept"
            else:
                img = poly.substitute(sigma)
                state = "zero" if img.is_zero() else ("kept" if img == poly else "bad")
            cache[key] = state
        if state == "bad":
            return lab, frozenset()
        if state == "kept":
            alive.append(lab)
    return None, frozenset(alive)


def _check_affine(sigma: dict) -> None:
    for p in sigma.values():
        if p.degree() > 1:
            raise RuleError(RULE, "substitution image is not affine")


def derive(node: Node, ctx: _Context, system: ConstraintSystem, substitutions: list,
           sound_cache: dict | None = None):
    """Recompute ``(conclusion, relation, degree, axioms_used)`` for ``node``."""
    space = system.space
    if sound_cache is None:
        sound_cache = {}
    r = node.rule
    if r == "Axiom":
        if node.label not in system:
            raise RuleError(UNKNOWN_LABEL, f"unknown axiom {node.label!r}")
        poly, rel = system.get(node.label)
        return poly, rel, poly.degree(), frozenset([node.label])
    if r == "Square":
        if node.coeff < 0:
            raise RuleError(NEGATIVE, "negative square coefficient")
        if node.poly.space is not space:
            raise RuleError(SPACE, "square lives in another space")
        return (node.poly * node.poly).scale(node.coeff), GE, 2 * node.poly.degree(), frozenset()
    if r == "Leaf":
        cert = node.cert
        key = ("leaf", id(cert))
        v = sound_cache.get(key)
        if v is None:
            v = verify_certificate(cert, system)
            sound_cache[key] = v
        if not v:
            raise RuleError(v.category, v.detail)
        return cert.target, GE, cert.degree_bound, frozenset(cert.labels_used())
    if r in ("NonnegCombination", "ProductWithSOS"):
        parts = []
        deg = NEG_INF
        used: set = set()
        rel = EQ
        for t in node.terms:
            cpoly, crel = ctx.concl(t.child)
            coeff = Fraction(t.coeff)
            mult_deg = 0
            factor = None
            if t.sos is not None:
                if crel != GE and crel != EQ:
                    raise RuleError(MALFORMED, "bad relation")
                if any(c < 0 for c, _ in t.sos):
                    raise RuleError(NEGATIVE, "negative coefficient in SOS multiplier")
                factor = sos_value(t.sos, space)
                mult_deg = sos_degree(t.sos)
            if t.poly is not None:
                if crel != EQ:
                    raise RuleError(RULE, "polynomial multiplier on an inequality")
                factor = t.poly if factor is None else factor * t.poly
                mult_deg = mult_deg + t.poly.degree()
            if crel == GE:
                rel = GE
                if coeff < 0:
                    raise RuleError(NEGATIVE, f"negative weight {coeff} on inequality node {t.child}")
            child_used = ctx.axioms(t.child)
            if t.subst is not None:
                sigma = substitutions[t.subst]
                _check_affine(sigma)
                bad, child_used = _substitution_sound(sigma, t.subst, child_used, system, sound_cache)
                if bad is not None:
                    raise RuleError(SUBSTITUTION, f"substitution alters axiom {bad!r}")
                cpoly = cpoly.substitute(sigma)
            if factor is not None:
                cpoly = cpoly * factor
            if cpoly.is_zero() or coeff == 0:
                continue
            parts.append((coeff, cpoly))
            deg = max(deg, ctx.degree(t.child) + mult_deg)
            used |= child_used
        for lab, v in node.eq_multipliers.items():
            if lab not in system.equalities:
                raise RuleError(UNKNOWN_LABEL, f"no equality labelled {lab!r}")
            rpoly = system.equalities[lab]
            parts.append((Fraction(1), v * rpoly))
            deg = max(deg, v.degree() + rpoly.degree())
            used.add(lab)
        return lincomb(space, parts), rel, deg, frozenset(used)
    if r == "SubstituteLinear":
        (child,) = node.children
        cpoly, crel = ctx.concl(child)
        sigma = substitutions[node.subst]
        _check_affine(sigma)
        bad, used = _substitution_sound(sigma, node.subst, ctx.axioms(child), system, sound_cache)
        if bad is not None:
            raise RuleError(SUBSTITUTION, f"substitution alters axiom {bad!r}")
        return cpoly.substitute(sigma), crel, ctx.degree(child), used
    if r == "PolynomialIdentity":
        (child,) = node.children
        cpoly, crel = ctx.concl(child)
        parts = []
        for c, factors in node.expr:
            acc = SparsePoly.constant(space, 1)
            for f in factors:
                acc = acc * f
            parts.append((Fraction(c), acc))
        value = lincomb(space, parts)
        if value != cpoly:
            raise RuleError(RESIDUAL, "restated expression differs from the child conclusion")
        return value, crel, ctx.degree(child), ctx.axioms(child)
    if r == "PowersLemma":
        (child,) = node.children
        h, crel = ctx.concl(child)
        c, e = node.coeff, node.exponent
        if crel != GE:
            raise RuleError(RULE, "powers lemma needs an inequality")
        if c < 0:
            raise RuleError(NEGATIVE, "powers lemma needs c >= 0")
        if not isinstance(e, int) or e < 1:
            raise RuleError(MALFORMED, "exponent must be a positive integer")
        x = h + c
        concl = x ** e - c ** e
        hd = h.degree()
        deg = max(ctx.degree(child) + (e - 1) * hd, e * hd) if not h.is_zero() else ctx.degree(child)
        return concl, GE, deg, ctx.axioms(child)
    if r == "SuperCSLemma":
        k = node.k
        if not isinstance(k, int) or k < 1:
            raise RuleError(MALFORMED, "super-CS needs k >= 1")
        if not _super_cs_checked(k):
            raise RuleError(RESIDUAL, "bivariate super-CS certificate failed")
        X, Y = node.x, node.y
        concl = (X ** (2 * k) + Y ** (2 * k)) / 2 - ((X + Y) / 2) ** (2 * k)
        deg = 2 * k * max(X.degree(), Y.degree(), 0)
        return concl, GE, deg, frozenset()
    raise RuleError(MALFORMED, f"unknown rule {r!r}")


def _topological_order(nodes: list[Node]) -> list[int] | Verdict:
    n = len(nodes)
    indeg = [0] * n
    parents: list[list[int]] = [[] for _ in range(n)]
    for i, node in enumerate(nodes):
        for c in node.children:
            if not isinstance(c, int) or c < 0 or c >= n:
                return Verdict.fail(DANGLING, f"node {i} references missing node {c}", i)
            indeg[i] += 1
            parents[c].append(i)
    order = [i for i in range(n) if indeg[i] == 0]
    head = 0
    while head < len(order):
        c = order[head]
        head += 1
        for p in parents[c]:
            indeg[p] -= 1
            if indeg[p] == 0:
                order.append(p)
    if len(order) != n:
        bad = min(i for i in range(n) if indeg[i] > 0)
        return Verdict.fail(CYCLE, f"cycle through node {bad}", bad)
    return order


def verify_dag(dag: ProofDAG, system: ConstraintSystem | None = None, target: SparsePoly | None = None,
               degree_bound: int | None = None, root: int | None = None) -> Verdict:
    """Check every node locally; report the first failing node id."""
    system = system or dag.system
    if system.space is not dag.space:
        return Verdict.fail(SPACE, "DAG and constraint system use different spaces")
    order = _topological_order(dag.nodes)
    if isinstance(order, Verdict):
        return order
    n = len(dag.nodes)
    concl: list = [None] * n
    degs: list = [None] * n
    axs: list = [None] * n
    ctx = _Context(dag, concl, degs, axs)
    cache: dict = {}
    for i in order:
        node = dag.nodes[i]
        if node.rule not in RULES:
            return Verdict.fail(MALFORMED, f"unknown rule {node.rule!r}", i)
        try:
            poly, rel, deg, used = derive(node, ctx, system, dag.substitutions, cache)
        except RuleError as e:
            return Verdict.fail(e.category, f"node {i} ({node.rule}): {e.detail}", i)
        except (PolyError, KeyError, TypeError, AttributeError) as e:
            return Verdict.fail(MALFORMED, f"node {i} ({node.rule}): {e}", i)
        if node.conclusion is None or poly != node.conclusion or rel != node.rel:
            return Verdict.fail(RESIDUAL, f"node {i} ({node.rule}): stated conclusion does not match", i)
        if degree_bound is not None and deg > degree_bound:
            return Verdict.fail(DEGREE, f"node {i} ({node.rule}): degree {deg} > {degree_bound}", i)
        concl[i] = (poly, rel)
        degs[i] = deg
        axs[i] = used
    r = dag.root if root is None else root
    if r is None or not 0 <= r < n:
        return Verdict.fail(DANGLING, "DAG has no root")
    if target is not None and dag.nodes[r].conclusion != target:
        return Verdict.fail(RESIDUAL, "root does not conclude the requested target", r)
    return Verdict.ok(f"{n} nodes, degree {degs[r]}")
