"""Degree-4k SOS proofs of the reverse hypercontractive inequality on the cube.

For indeterminates ``f(x), g(x)``, ``x in {-1,1}^n``, and ``0 <= rho <= rho*``
the target is ``E[f(x)^2k g(y)^2k] - E[f]^2k E[g]^2k >= 0`` with ``(x, y)``
rho-correlated.  Splitting on the last coordinate writes the left side as a
``1/4 +- rho/4`` combination of four ``(n-1)``-dimensional instances; each is
handled by induction and the four resulting means are combined with the
two-point base case.

Means are introduced as macro indeterminates ``Ef(z)`` (the mean of ``f`` over
the free leading coordinates, trailing coordinates fixed to ``z``) defined by
the recursive equalities ``Ef(z) = (Ef(+1,z) + Ef(-1,z))/2``.  The root node,
when the proof stands alone, substitutes the explicit means back in, which
sends every definition to zero and leaves an axiom-free proof.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .certkit import ConstraintSystem, ProofDAG, ResourceExhausted, SOSCertificate, Term, verify_certificate
from .polycore import IndeterminateSpace, SparsePoly, lincomb
from .twopoint import TwoPointParams, four_block_form, homogenize_certificate, rho_star, twopoint_certificate

MAX_DIMENSION = 9


def points(n: int) -> list[tuple]:
    """``{-1,1}^n`` in lexicographic order with ``+1 < -1``."""
    return list(itertools.product((1, -1), repeat=n))


def point_label(name: str, x: tuple) -> str:
    return f"{name}(" + ",".join("+1" if v == 1 else "-1" for v in x) + ")"


@dataclass
class CubeIndeterminates:
    n: int
    space: IndeterminateSpace
    f_vars: dict
    g_vars: dict

    @classmethod
    def create(cls, n: int, space: IndeterminateSpace | None = None, f: str = "f", g: str = "g"):
        space = IndeterminateSpace() if space is None else space
        fv = {x: space.ensure(point_label(f, x)) for x in points(n)}
        gv = fv if g == f else {x: space.ensure(point_label(g, x)) for x in points(n)}
        return cls(n, space, fv, gv)

    def F(self, x: tuple) -> SparsePoly:
        return self.space.var(self.f_vars[x])

    def G(self, x: tuple) -> SparsePoly:
        return self.space.var(self.g_vars[x])


def pair_weight(x: tuple, y: tuple, rho: Fraction) -> Fraction:
    w = Fraction(1)
    for a, b in zip(x, y):
        w *= Fraction(1, 4) + Fraction(rho) / 4 * a * b
    return w


def correlated_moment(space: IndeterminateSpace, fv: dict, gv: dict, k: int, rho: Fraction) -> SparsePoly:
    """``E[f(x)^2k g(y)^2k]`` over rho-correlated pairs (a single sum of monomials)."""
    e = 2 * k
    terms: dict = {}
    for x, fid in fv.items():
        for y, gid in gv.items():
            if fid is None or gid is None:
                continue
            if fid == gid:
                m = (fid, 2 * e)
            else:
                a, b = sorted((fid, gid))
                m = (a, e, b, e)
            terms[m] = terms.get(m, 0) + pair_weight(x, y, rho)
    return SparsePoly.from_terms(space, terms)


def _mean(space: IndeterminateSpace, ids) -> SparsePoly:
    """Average over a list of variable ids; ``None`` entries count as zero."""
    ids = list(ids)
    return lincomb(space, [(Fraction(1, len(ids)), space.var(i)) for i in ids if i is not None])


@dataclass
class CorrelatedExpectation:
    n: int
    k: int
    rho: Fraction
    lhs: SparsePoly
    rhs: SparsePoly
    cube: CubeIndeterminates

    @property
    def target(self) -> SparsePoly:
        return self.lhs - self.rhs

    def value(self, point: dict) -> Fraction:
        """``lhs - rhs`` at a point, with both means evaluated before powering."""
        e = 2 * self.k
        fv, gv = self.cube.f_vars.values(), self.cube.g_vars.values()
        mf = sum((point[v] for v in fv), Fraction(0)) / len(fv)
        mg = sum((point[v] for v in gv), Fraction(0)) / len(gv)
        return self.lhs.eval(point) - mf ** e * mg ** e


def _check_params(n: int, k: int, rho) -> Fraction:
    rho = Fraction(rho)
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    if not 0 <= rho <= rho_star(k):
        raise ValueError(f"rho must lie in [0, {rho_star(k)}]")
    return rho


def build_expectations(n: int, k: int, rho, cube: CubeIndeterminates | None = None) -> CorrelatedExpectation:
    rho = _check_params(n, k, rho)
    cube = cube or CubeIndeterminates.create(n)
    sp = cube.space
    lhs = correlated_moment(sp, cube.f_vars, cube.g_vars, k, rho)
    mf = _mean(sp, cube.f_vars.values())
    mg = _mean(sp, cube.g_vars.values())
    rhs = mf ** (2 * k) * mg ** (2 * k)
    return CorrelatedExpectation(n, k, rho, lhs, rhs, cube)


# --------------------------------------------------------------------------- base case

def base_case_target(space: IndeterminateSpace, F0, F1, G0, G1, k: int, rho) -> SparsePoly:
    return four_block_form(space, F0, F1, G0, G1, k, Fraction(rho),
                           minus=((F0 + F1) / 2) ** (2 * k) * ((G0 + G1) / 2) ** (2 * k))


_HOM_CACHE: dict = {}


def homogeneous_base(k: int, rho) -> SOSCertificate:
    key = (k, Fraction(rho))
    if key not in _HOM_CACHE:
        p = TwoPointParams(k, Fraction(rho))
        _HOM_CACHE[key] = homogenize_certificate(twopoint_certificate(p), p)
    return _HOM_CACHE[key]


def base_case_certificate(k: int, rho, space: IndeterminateSpace | None = None,
                          names: tuple = ("F0", "F1", "G0", "G1"), verify: bool = True) -> SOSCertificate:
    """Two-point certificate under ``(mu, alpha, nu, beta) = ((F0+F1)/2, (F0-F1)/2, (G0+G1)/2, (G0-G1)/2)``."""
    rho = Fraction(rho)
    if not 0 <= rho <= rho_star(k):
        raise ValueError("rho out of range")
    space = IndeterminateSpace(list(names)) if space is None else space
    F0, F1, G0, G1 = (space.zero() if x is None else space.var(space.ensure(x)) if isinstance(x, str)
                      else space.var(x) for x in names)
    sigma = {"mu": (F0 + F1) / 2, "alpha": (F0 - F1) / 2, "nu": (G0 + G1) / 2, "beta": (G0 - G1) / 2}
    hom = homogeneous_base(k, rho)
    u0 = [(c, s.substitute(sigma, space)) for c, s in hom.u0]
    target = base_case_target(space, F0, F1, G0, G1, k, rho)
    cert = SOSCertificate(target, u0=u0, degree_bound=4 * k)
    if verify:
        v = verify_certificate(cert)
        if not v:
            raise ValueError(f"base case substitution mismatch: {v.detail}")
    return cert


# --------------------------------------------------------------------------- induction

class ReverseBuilder:
    """Adds the inductive reverse-hypercontractivity proof to an existing DAG.

    ``fv``/``gv`` map points of ``{-1,1}^n`` to variable ids of ``dag.space``
    (``None`` for a point where the function is identically zero); passing
    the same map for both proves the ``g = f`` instance.
    """

    def __init__(self, dag: ProofDAG, fv: dict, gv: dict, k: int, rho, fname: str = "f", gname: str = "g",
                 max_dimension: int = MAX_DIMENSION):
        self.dag, self.space, self.system = dag, dag.space, dag.system
        self.fv, self.gv = fv, gv
        self.k, self.rho = k, Fraction(rho)
        self.n = len(next(iter(fv)))
        if self.n > max_dimension:
            raise ResourceExhausted(f"n = {self.n} needs {2 * 2 ** self.n} indeterminates; cap is n <= {max_dimension}")
        self.names = (fname, fname if gv is fv else gname)
        self._macro: dict = {}
        self._defs: dict = {}
        self._leaf_template = None
        self.leaf_ids: list[int] = []
        self.main_ids: list[int] = []
        self._base_cache: dict = {}

    # macros ---------------------------------------------------------------------
    def _which(self, fn: int) -> dict:
        return self.fv if fn == 0 else self.gv

    def _pv(self, vid) -> SparsePoly:
        return self.space.zero() if vid is None else self.space.var(vid)

    def mean_var(self, fn: int, tag: tuple) -> int:
        """Variable for the mean of f (fn=0) or g (fn=1) with trailing coordinates ``tag``."""
        if len(tag) == self.n:
            return self._which(fn)[tag]
        name = self.names[fn]
        key = (name, tag)
        if key in self._macro:
            return self._macro[key]
        lab = "E" + point_label(name, tag)
        mid = self.space.ensure(lab)
        self._macro[key] = mid
        lo, hi = self.mean_var(fn, (1,) + tag), self.mean_var(fn, (-1,) + tag)
        sp = self.space
        d = sp.var(mid) - (self._pv(lo) + self._pv(hi)) / 2
        dlab = "def:" + lab
        if dlab not in self.system:
            self.system.add_eq(dlab, d)
        self._defs[key] = dlab
        return mid

    def explicit_mean(self, fn: int, tag: tuple) -> SparsePoly:
        m = self.n - len(tag)
        pts = [x + tag for x in points(m)]
        return _mean(self.space, [self._which(fn)[p] for p in pts])

    def unfold_sigma(self) -> dict:
        return {mid: self.explicit_mean(0 if name == self.names[0] else 1, tag)
                for (name, tag), mid in self._macro.items()}

    def mean_identity(self, fn: int) -> dict:
        """Multipliers ``c_z`` with ``sum c_z def_z = E(root) - explicit mean`` (telescoping)."""
        name = self.names[fn]
        return {self._defs[(name, tag)]: Fraction(1, 2 ** len(tag))
                for j in range(self.n) for tag in points(j)}

    def root_macros(self) -> tuple[int, int]:
        return self.mean_var(0, ()), self.mean_var(1, ())

    # nodes ----------------------------------------------------------------------
    def _base_cert(self, ids: tuple) -> SOSCertificate:
        if ids not in self._base_cache:
            self._base_cache[ids] = base_case_certificate(self.k, self.rho, self.space, ids, verify=False)
        return self._base_cache[ids]

    def _eq_mults(self, z, w, X, Y, M, N) -> dict:
        """Multipliers turning ``- X^2k Y^2k`` into ``- M^2k N^2k`` when ``X - M`` is minus a definition."""
        e = 2 * self.k
        hX = lincomb(self.space, [(1, X ** i * M ** (e - 1 - i)) for i in range(e)])
        hY = lincomb(self.space, [(1, Y ** i * N ** (e - 1 - i)) for i in range(e)])
        out: dict = {}
        for fn, tag, mult in ((0, z, hX * Y ** e), (1, w, M ** e * hY)):
            if len(tag) == self.n:
                continue
            lab = self._defs[(self.names[fn], tag)]
            out[lab] = out.get(lab, 0) - mult
        return {lab: v for lab, v in out.items() if not (isinstance(v, SparsePoly) and v.is_zero())}

    def build(self, standalone: bool = True) -> int:
        """Create all nodes; returns the root.  ``standalone`` unfolds the macros at the root."""
        # macros for every level (created top-down so labels are deterministic)
        for j in range(self.n):
            for tag in points(j):
                self.mean_var(0, tag)
                self.mean_var(1, tag)
        # bottom leaves
        for z in points(self.n - 1):
            for w in points(self.n - 1):
                ids = (self.fv[(1,) + z], self.fv[(-1,) + z], self.gv[(1,) + w], self.gv[(-1,) + w])
                lid = self.dag.leaf(self._base_cert(ids), note=f"base case at {z or '()'}|{w or '()'}")
                self.leaf_ids.append(lid)
                if self._leaf_template is None and None not in ids and len(set(ids)) == 4:
                    self._leaf_template = (lid, ids)
        if self._leaf_template is None and self.n > 1:
            tv = tuple(self.space.ensure(f"tpl({x})") for x in ("F0", "F1", "G0", "G1"))
            lid = self.dag.leaf(self._base_cert(tv), note="base case template")
            self._leaf_template = (lid, tv)
        concl: dict = {}
        for m in range(1, self.n + 1):
            top = m == self.n
            for z in points(self.n - m):
                for w in points(self.n - m):
                    concl[(z, w)] = self._main_node(z, w, m, concl, standalone and top)
        root = concl[((), ())]
        self.dag.root = root
        return root

    def _main_node(self, z, w, m, concl, unfold_here) -> int:
        sp = self.space
        ids = (self.mean_var(0, (1,) + z), self.mean_var(0, (-1,) + z),
               self.mean_var(1, (1,) + w), self.mean_var(1, (-1,) + w))
        terms = []
        sigma_unfold = self.unfold_sigma() if unfold_here and m > 1 else None
        if m > 1:
            sid_unfold = self.dag.add_substitution(sigma_unfold) if sigma_unfold else None
            for a in (1, -1):
                for b in (1, -1):
                    wgt = Fraction(1, 4) + self.rho / 4 * a * b
                    terms.append(Term(concl[((a,) + z, (b,) + w)], coeff=wgt, subst=sid_unfold))
            # base case applied to the four child means
            lid, tvars = self._leaf_template
            images = [sp.var(i) for i in ids]
            if sigma_unfold:
                images = [p.substitute(sigma_unfold) for p in images]
            terms.append(Term(lid, subst=self.dag.add_substitution(dict(zip(tvars, images)))))
        else:
            terms.append(Term(self.leaf_ids[self._bottom_index(z, w)]))
        eqm = {}
        if not unfold_here:
            X = (self._pv(ids[0]) + self._pv(ids[1])) / 2
            Y = (self._pv(ids[2]) + self._pv(ids[3])) / 2
            M, N = sp.var(self.mean_var(0, z)), sp.var(self.mean_var(1, w))
            eqm = self._eq_mults(z, w, X, Y, M, N)
        nid = self.dag.combine(terms, eqm, note=f"dimension {m} at {z or '()'}|{w or '()'}")
        self.main_ids.append(nid)
        return nid

    def _bottom_index(self, z, w) -> int:
        pts = points(self.n - 1)
        return pts.index(z) * len(pts) + pts.index(w)


def inductive_certificate(n: int, k: int, rho, g_equals_f: bool = False,
                          max_dimension: int = MAX_DIMENSION) -> tuple[ProofDAG, CorrelatedExpectation]:
    """Proof DAG whose root concludes ``lhs - rhs >= 0`` of ``build_expectations``."""
    rho = _check_params(n, k, rho)
    if n > max_dimension:
        raise ResourceExhausted(f"n = {n} needs {2 * 2 ** n} indeterminates; cap is n <= {max_dimension}")
    space = IndeterminateSpace()
    cube = CubeIndeterminates.create(n, space, "f", "f" if g_equals_f else "g")
    system = ConstraintSystem(space)
    dag = ProofDAG(system)
    ReverseBuilder(dag, cube.f_vars, cube.g_vars, k, rho, max_dimension=max_dimension).build(standalone=True)
    return dag, build_expectations(n, k, rho, cube)


def soundness_probe(poly: SparsePoly, count: int = 500, seed: int = 0, span: int = 3, den: int = 7,
                    evaluator=None, cross_checks: int = 3) -> list[dict]:
    """Evaluate ``poly`` at random rational points; return the points where it is negative.

    A cheaper ``evaluator`` may stand in for ``poly.eval``; it is compared with
    the full expansion on the first ``cross_checks`` points and a mismatch
    raises ``AssertionError``.
    """
    rng = random.Random(seed)
    ids = sorted(poly.variables())
    bad = []
    for i in range(count):
        pt = {v: Fraction(rng.randint(-span * den, span * den), den) for v in ids}
        if evaluator is None:
            val = poly.eval(pt)
        else:
            val = evaluator(pt)
            if i < cross_checks and val != poly.eval(pt):
                raise AssertionError("evaluator disagrees with the polynomial")
        if val < 0:
            bad.append(pt)
    return bad
