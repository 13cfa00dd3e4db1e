"""Forward (2, 2s)-hypercontractivity: moment conditions and inductive SOS proofs.

The coordinates ``x_1..x_n`` are independent with zero odd moments and even
moments ``m_2j``.  For indeterminates ``fhat_i(S)`` the proved statement is

    prod_i E[f_i^2] - E[prod_i (T_rho f_i)^2] >= 0

with SOS degree ``2s``.  Only ``rho^2`` enters, so irrational ``rho`` with
rational square (e.g. ``rho = 1/sqrt 3``) are handled exactly.

Expectations of squares become SOS through the moment matrix: for one
coordinate the Hankel matrix of ``rho x`` splits into an even and an odd
block, each factored by exact LDL, and the multivariate matrix is their
tensor product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, prod

from .certkit import (ConstraintSystem, ProofDAG, ResourceExhausted, SOSCertificate, Term, Verdict,
                      ldl_psd, verify_certificate)
from .polycore import IndeterminateSpace, SparsePoly, lincomb

MAX_INDETERMINATES = 64


# --------------------------------------------------------------------------- moments

def moment_bound(s: int, j: int) -> Fraction:
    if not 1 <= j <= s:
        raise ValueError("need 1 <= j <= s")
    return Fraction((2 * s - 1) ** j * comb(s, j), comb(2 * s, 2 * j))


def double_factorial(n: int) -> int:
    return prod(range(n, 0, -2)) if n > 0 else 1


def remark_product_form(s: int, j: int) -> Fraction:
    acc = Fraction(double_factorial(2 * j - 1))
    for i in range(1, j):
        acc *= Fraction(2 * s - 1, 2 * s - (2 * i + 1))
    return acc


def check_remark_product_form(s_max: int) -> Verdict:
    """Product form, Gaussian lower bound and Rademacher lower bound for all ``j <= s <= s_max``."""
    if s_max < 1:
        raise ValueError("s_max must be positive")
    for s in range(1, s_max + 1):
        for j in range(1, s + 1):
            b = moment_bound(s, j)
            if b != remark_product_form(s, j):
                return Verdict.fail("residual", f"product form differs at s={s}, j={j}")
            if b < double_factorial(2 * j - 1):
                return Verdict.fail("residual", f"Gaussian moment exceeds the bound at s={s}, j={j}")
            if b < 1:
                return Verdict.fail("residual", f"Rademacher moment exceeds the bound at s={s}, j={j}")
            if s > j and moment_bound(s, j) > moment_bound(s - 1, j):
                return Verdict.fail("residual", f"bound not decreasing in s at s={s}, j={j}")
    return Verdict.ok(f"product form holds for s <= {s_max}")


@dataclass(frozen=True)
class MomentSequence:
    s: int
    even_moments: tuple  # m_2, m_4, ..., m_2s
    odd_moments_zero: bool = True

    def __post_init__(self):
        ms = tuple(Fraction(m) for m in self.even_moments)
        object.__setattr__(self, "even_moments", ms)
        if len(ms) != self.s or self.s < 1:
            raise ValueError(f"need exactly s = {self.s} even moments")
        if any(m <= 0 for m in ms):
            raise ValueError("even moments must be positive")
        if not self.odd_moments_zero:
            raise ValueError("odd moments must vanish")

    @classmethod
    def rademacher(cls, s: int) -> "MomentSequence":
        return cls(s, (1,) * s)

    @classmethod
    def gaussian(cls, s: int) -> "MomentSequence":
        return cls(s, tuple(double_factorial(2 * j - 1) for j in range(1, s + 1)))

    def moment(self, a: int) -> Fraction:
        """``E[x^a]`` for ``0 <= a <= 2s``."""
        if a == 0:
            return Fraction(1)
        if a % 2:
            return Fraction(0)
        return self.even_moments[a // 2 - 1]

    def satisfies_conditions(self) -> bool:
        return all(self.even_moments[j - 1] <= moment_bound(self.s, j) for j in range(1, self.s + 1))


def zfc_termwise_check(s: int, rho_sq, moments: MomentSequence) -> Verdict:
    """``C(2s,2j) rho^2j m_2j <= C(s,j)`` for every ``j``; a failure names the first bad ``j``."""
    rho_sq = Fraction(rho_sq)
    if not 0 <= rho_sq <= Fraction(1, 2 * s - 1):
        raise ValueError("need 0 <= rho^2 <= 1/(2s-1)")
    if moments.s != s:
        raise ValueError("moment sequence has the wrong length")
    tight = []
    for j in range(s + 1):
        lhs = comb(2 * s, 2 * j) * rho_sq ** j * moments.moment(2 * j)
        if lhs > comb(s, j):
            return Verdict.fail("residual", f"term j={j}: {lhs} > {comb(s, j)}", j)
        if lhs == comb(s, j):
            tight.append(j)
    return Verdict.ok("tight at j in " + str(tight))


def binomial_identity_check(s_max: int) -> Verdict:
    """``sum_v 4^v/C(2v,v) C(r,v) C(s-r,v) = C(2s,2r)/C(s,r)`` and ``T(r+1) = T(r)``, ``T(0) = 1``."""
    if s_max < 1:
        raise ValueError("s_max must be positive")
    for s in range(s_max + 1):
        prev = None
        for r in range(s + 1):
            lhs = sum(Fraction(4 ** v, comb(2 * v, v)) * comb(r, v) * comb(s - r, v) for v in range(r + 1))
            if lhs != Fraction(comb(2 * s, 2 * r), comb(s, r)):
                return Verdict.fail("residual", f"identity fails at s={s}, r={r}")
            T = lhs * Fraction(comb(s, r), comb(2 * s, 2 * r))
            if (r == 0 and T != 1) or (prev is not None and T - prev != 0):
                return Verdict.fail("residual", f"recurrence fails at s={s}, r={r}")
            prev = T
    return Verdict.ok(f"identity holds for r <= s <= {s_max}")


# --------------------------------------------------------------------------- AM-GM lemma

def _balanced(v: int):
    """Balanced subsets ``T`` of ``range(v)`` containing 0 (one per pair ``{T, complement}``)."""
    for rest in itertools.combinations(range(1, v), v // 2 - 1):
        yield (0,) + rest


def amgm_lemma_certificate(v: int) -> SOSCertificate:
    """``(1/C(v,v/2)) sum_T prod_T G^2 prod_rest H^2 - prod G_i H_i`` as a sum of squares."""
    if v < 2 or v % 2:
        raise ValueError("v must be a positive even integer")
    sp = IndeterminateSpace([f"G{i}" for i in range(1, v + 1)] + [f"H{i}" for i in range(1, v + 1)])
    G = [sp.var(f"G{i}") for i in range(1, v + 1)]
    H = [sp.var(f"H{i}") for i in range(1, v + 1)]
    c = comb(v, v // 2)
    full = set(range(v))
    parts = []
    for T in itertools.combinations(range(v), v // 2):
        rest = full - set(T)
        parts.append((Fraction(1, c), prod((G[i] ** 2 for i in T), start=sp.const(1))
                      * prod((H[i] ** 2 for i in rest), start=sp.const(1))))
    target = lincomb(sp, parts) - prod((G[i] * H[i] for i in range(v)), start=sp.const(1))
    u0 = []
    for T in _balanced(v):
        rest = sorted(full - set(T))
        A = prod((G[i] for i in T), start=sp.const(1)) * prod((H[i] for i in rest), start=sp.const(1))
        B = prod((G[i] for i in rest), start=sp.const(1)) * prod((H[i] for i in T), start=sp.const(1))
        u0.append((Fraction(1, c), A - B))
    cert = SOSCertificate(target, u0=u0, degree_bound=2 * v)
    ok = verify_certificate(cert)
    if not ok:
        raise AssertionError(ok.detail)
    return cert


# --------------------------------------------------------------------------- Fourier indeterminates

def subset_label(i: int, S) -> str:
    return f"f{i}[" + ",".join(str(j) for j in sorted(S)) + "]"


class FourierIndeterminates:
    """``fhat_i(S)`` for ``1 <= i <= s`` and ``S`` a subset of ``[n]``, plus a work space with ``x_1..x_n``."""

    def __init__(self, n: int, s: int):
        self.n, self.s = n, s
        subsets = [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(1, n + 1), r)]
        self.subsets = subsets
        labels = [subset_label(i, S) for i in range(1, s + 1) for S in subsets]
        self.space = IndeterminateSpace(labels)
        self.work = IndeterminateSpace(labels + [f"x{j}" for j in range(1, n + 1)])
        self.coeffs = {(i, S): self.space.id(subset_label(i, S)) for i in range(1, s + 1) for S in subsets}
        self.x_ids = [self.work.id(f"x{j}") for j in range(1, n + 1)]
        self._to_space = {self.work.id(subset_label(i, S)): vid for (i, S), vid in self.coeffs.items()}

    def function(self, i: int, m: int, tail: frozenset) -> SparsePoly:
        """``phi(x_1..x_m) = sum_{S in [m]} fhat_i(S + tail) x^S`` in the work space."""
        W = self.work
        parts = []
        for r in range(m + 1):
            for S in itertools.combinations(range(1, m + 1), r):
                mono = W.var(subset_label(i, frozenset(S) | tail))
                for j in S:
                    mono = mono * W.var(self.x_ids[j - 1])
                parts.append((1, mono))
        return lincomb(W, parts)

    def norm_sq(self, i: int, m: int, tail: frozenset) -> SparsePoly:
        """``E[phi^2] = sum_S fhat_i(S + tail)^2`` in the coefficient space."""
        sp = self.space
        return lincomb(sp, [(1, sp.var(self.coeffs[(i, frozenset(S) | tail)]) ** 2)
                            for r in range(m + 1) for S in itertools.combinations(range(1, m + 1), r)])

    def to_space(self, p: SparsePoly) -> SparsePoly:
        return p.rename(self._to_space, self.space)

    def split_x(self, p: SparsePoly) -> dict:
        """``{x exponent vector: coefficient polynomial}`` with coefficients in the coefficient space."""
        xpos = {v: k for k, v in enumerate(self.x_ids)}
        out: dict = {}
        for mono, c in p.terms.items():
            ex = [0] * self.n
            rest = []
            for t in range(0, len(mono), 2):
                v = mono[t]
                if v in xpos:
                    ex[xpos[v]] = mono[t + 1]
                else:
                    rest += [self._to_space[v], mono[t + 1]]
            key = tuple(ex)
            out.setdefault(key, {})[tuple(rest)] = c
        return {k: SparsePoly(terms, p.den, self.space) for k, terms in out.items()}


class MomentFunctional:
    """``E[p(rho x)]`` for polynomials in the work space, via scaled moments."""

    def __init__(self, moments: MomentSequence, rho_sq: Fraction):
        self.m, self.rho_sq = moments, Fraction(rho_sq)
        top = 2 * moments.s
        self.mu = [self.rho_sq ** (a // 2) * moments.moment(a) if a % 2 == 0 else Fraction(0)
                   for a in range(top + 1)]
        self._ldl = self._factor(moments.s)

    def expect(self, fi: FourierIndeterminates, p: SparsePoly) -> SparsePoly:
        parts = []
        for ex, cpoly in fi.split_x(p).items():
            w = prod((self.mu[e] for e in ex), start=Fraction(1))
            if w:
                parts.append((w, cpoly))
        return lincomb(fi.space, parts)

    def _factor(self, deg: int):
        """Per-coordinate ``L``, ``d`` with ``Hankel = L diag(d) L^T`` (parity blocks)."""
        size = deg + 1
        L = [[Fraction(0)] * size for _ in range(size)]
        d = [Fraction(0)] * size
        for par in (0, 1):
            idx = list(range(par, size, 2))
            H = [[self.mu[a + b] for b in idx] for a in idx]
            res = ldl_psd(H)
            if res is None:
                raise ValueError("moment matrix is not positive semidefinite")
            Lb, db = res
            for r, a in enumerate(idx):
                d[a] = db[r]
                for c, b in enumerate(idx):
                    L[a][b] = Lb[r][c]
        return L, d

    def square_terms(self, fi: FourierIndeterminates, p: SparsePoly, weight: Fraction = Fraction(1)) -> list:
        """Weighted squares whose sum is ``E[p(rho x)^2]``."""
        L, d = self._ldl
        coeffs = fi.split_x(p)
        buckets: dict = {}
        for ex, cpoly in coeffs.items():
            choices = [[b for b in range(e + 1) if L[e][b] and d[b]] for e in ex]
            for kappa in itertools.product(*choices):
                lw = prod((L[e][b] for e, b in zip(ex, kappa)), start=Fraction(1))
                buckets.setdefault(kappa, []).append((lw, cpoly))
        out = []
        for kappa in sorted(buckets):
            sq = lincomb(fi.space, buckets[kappa])
            if not sq.is_zero():
                out.append((weight * prod((d[b] for b in kappa), start=Fraction(1)), sq))
        return out


# --------------------------------------------------------------------------- the inductive proof

def _partitions(s: int):
    """``(U, V, W)`` with ``|V|`` even, ordered by ``(|U|, |V|, lexicographic)``."""
    items = range(s)
    out = []
    for u in range(s + 1):
        for v in range(0, s - u + 1, 2):
            for U in itertools.combinations(items, u):
                rest = [i for i in items if i not in U]
                for V in itertools.combinations(rest, v):
                    W = tuple(i for i in rest if i not in V)
                    out.append((U, V, W))
    return out


def lhs_weight(u: int, v: int, rho_sq: Fraction, mom: MomentSequence) -> Fraction:
    return rho_sq ** (u + v // 2) * 2 ** v * mom.moment(2 * u + v)


def moment_weight(u: int, v: int, s: int) -> Fraction:
    return Fraction(2 ** v, comb(v, v // 2)) * Fraction(comb(s, u + v // 2), comb(2 * s, 2 * u + v))


class HyperBuilder:
    def __init__(self, n: int, s: int, rho_sq, moments: MomentSequence, max_indeterminates: int = MAX_INDETERMINATES):
        self.n, self.s = n, s
        self.rho_sq = Fraction(rho_sq)
        if s < 1 or n < 0:
            raise ValueError("need s >= 1 and n >= 0")
        if not 0 <= self.rho_sq <= Fraction(1, 2 * s - 1):
            raise ValueError("need 0 <= rho^2 <= 1/(2s-1)")
        if moments.s != s:
            raise ValueError("moment sequence has the wrong length")
        if not moments.satisfies_conditions():
            raise ValueError("moments violate the s-moment conditions")
        if s * 2 ** n > max_indeterminates:
            raise ResourceExhausted(f"s*2^n = {s * 2 ** n} indeterminates exceeds the cap {max_indeterminates}")
        self.mom = moments
        self.fi = FourierIndeterminates(n, s)
        self.E = MomentFunctional(moments, self.rho_sq)
        self.system = ConstraintSystem(self.fi.space)
        self.dag = ProofDAG(self.system)
        self.parts = _partitions(s)

    def target(self, m: int | None = None, tails: tuple | None = None) -> SparsePoly:
        """``prod E[phi_i^2] - E[prod (T phi_i)^2]`` computed directly."""
        m = self.n if m is None else m
        tails = tails or tuple(frozenset() for _ in range(self.s))
        fi = self.fi
        rhs = prod((fi.norm_sq(i + 1, m, tails[i]) for i in range(self.s)), start=fi.space.const(1))
        phis = [fi.function(i + 1, m, tails[i]) for i in range(self.s)]
        lhs = self.E.expect(fi, prod((p * p for p in phis), start=fi.work.const(1)))
        return rhs - lhs

    def build(self) -> int:
        s, fi = self.s, self.fi
        if self.n == 0:
            zero = SOSCertificate(fi.space.zero(), u0=[], degree_bound=2 * s)
            self.dag.root = self.dag.leaf(zero, note="n = 0: both sides coincide")
            return self.dag.root
        nodes: dict = {}
        for m in range(1, self.n + 1):
            tails_space = [frozenset(c) for r in range(self.n - m + 1)
                           for c in itertools.combinations(range(m + 1, self.n + 1), r)]
            for tails in itertools.product(tails_space, repeat=s):
                nodes[(m, tails)] = self._node(m, tails, nodes)
        self.dag.root = nodes[(self.n, tuple(frozenset() for _ in range(s)))]
        return self.dag.root

    def _node(self, m: int, tails: tuple, nodes: dict) -> int:
        s, fi, E = self.s, self.fi, self.E
        W = fi.work
        one = W.const(1)
        g = [fi.function(i + 1, m - 1, tails[i] | {m}) for i in range(s)]
        h = [fi.function(i + 1, m - 1, tails[i]) for i in range(s)]
        amgm_target, amgm_sq = [], []
        slack: dict = {}
        child_w: dict = {}
        for U, V, Wp in self.parts:
            u, v = len(U), len(V)
            c_uv = lhs_weight(u, v, self.rho_sq, self.mom)
            w_uv = moment_weight(u, v, s)
            base = prod((g[i] for i in U), start=one) * prod((h[i] for i in Wp), start=one)
            Ts = list(itertools.combinations(V, v // 2))
            for T in Ts:
                R = frozenset(U) | frozenset(T)
                slack[R] = slack.get(R, 0) + w_uv - (c_uv / comb(v, v // 2) if v else c_uv)
                child_w[R] = child_w.get(R, 0) + w_uv
            if v and c_uv:
                cv = comb(v, v // 2)
                Y = [prod((g[i] for i in sorted(set(U) | set(T))), start=one) ** 2
                     * prod((h[i] for i in Wp + tuple(j for j in V if j not in T)), start=one) ** 2 for T in Ts]
                cross = base * base * prod((g[i] * h[i] for i in V), start=one)
                amgm_target.append((c_uv / cv, lincomb(W, [(1, y) for y in Y]) - cross * cv))
                for T in _balanced_of(V):
                    rest = [j for j in V if j not in T]
                    A = prod((g[i] for i in T), start=one) * prod((h[i] for i in rest), start=one)
                    B = prod((g[i] for i in rest), start=one) * prod((h[i] for i in T), start=one)
                    amgm_sq += E.square_terms(fi, base * (A - B), c_uv / cv)
        terms = []
        if m > 1:
            for R in sorted(child_w, key=lambda r: (len(r), sorted(r))):
                ct = tuple(tails[i] | {m} if i in R else tails[i] for i in range(s))
                terms.append(Term(nodes[(m - 1, ct)], coeff=child_w[R]))
        if amgm_target:
            tgt = E.expect(fi, lincomb(W, amgm_target))
            cert = SOSCertificate(tgt, u0=amgm_sq, degree_bound=2 * s)
            terms.append(Term(self.dag.leaf(cert, note=f"AM-GM at level {m}")))
        slack_sq, slack_parts = [], []
        for R in sorted(slack, key=lambda r: (len(r), sorted(r))):
            if slack[R]:
                y = prod((g[i] if i in R else h[i] for i in range(s)), start=one)
                slack_parts.append((slack[R], y * y))
                slack_sq += E.square_terms(fi, y, slack[R])
        if slack_parts:
            cert = SOSCertificate(E.expect(fi, lincomb(W, slack_parts)), u0=slack_sq, degree_bound=2 * s)
            terms.append(Term(self.dag.leaf(cert, note=f"moment slack at level {m}")))
        if not terms:
            return self.dag.leaf(SOSCertificate(fi.space.zero(), degree_bound=2 * s), note="zero gap")
        return self.dag.combine(terms, note=f"level {m}, tails {[sorted(t) for t in tails]}")


def _balanced_of(V: tuple):
    for T in _balanced(len(V)):
        yield tuple(V[i] for i in T)


def hypercon_certificate(n: int, s: int, rho_sq, moments: MomentSequence | None = None,
                         max_indeterminates: int = MAX_INDETERMINATES) -> tuple[ProofDAG, SparsePoly]:
    """Proof DAG and its root target ``prod E[f_i^2] - E[prod (T_rho f_i)^2]``."""
    moments = moments or MomentSequence.rademacher(s)
    b = HyperBuilder(n, s, rho_sq, moments, max_indeterminates)
    b.build()
    return b.dag, b.target()


def single_function_corollary(dag: ProofDAG, fi: FourierIndeterminates) -> int:
    """Identify every ``f_i`` with ``f_1``: ``E[(T f)^2s] <= E[f^2]^s``."""
    sigma = {fi.coeffs[(i, S)]: fi.space.var(fi.coeffs[(1, S)])
             for (i, S) in fi.coeffs if i > 1}
    return dag.substitute(dag.root, sigma, note="all functions equal")


def low_degree_corollary(n: int, s: int, rho, k: int, moments: MomentSequence | None = None):
    """``E[g^2s] <= rho^(-2ks) (sum_S ghat(S)^2)^s`` for ``g`` of degree at most ``k``.

    Needs a rational ``rho`` so that ``fhat(S) = rho^-|S| ghat(S)`` is a
    rational linear substitution.  Returns ``(dag, root, target)``.
    """
    rho = Fraction(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    moments = moments or MomentSequence.rademacher(s)
    b = HyperBuilder(n, s, rho * rho, moments)
    b.build()
    fi, dag, sp = b.fi, b.dag, b.fi.space
    root = single_function_corollary(dag, fi)
    sigma = {}
    for (i, S), vid in fi.coeffs.items():
        if i == 1:
            sigma[vid] = sp.var(vid) / rho ** len(S) if len(S) <= k else sp.zero()
    root = dag.substitute(root, sigma, note="restrict to degree <= k and undo T_rho")
    low = [S for (i, S) in fi.coeffs if i == 1 and len(S) <= k]
    A = lincomb(sp, [(rho ** (-2 * len(S)), sp.var(fi.coeffs[(1, S)]) ** 2) for S in low])
    B = lincomb(sp, [(rho ** (-2 * k), sp.var(fi.coeffs[(1, S)]) ** 2) for S in low])
    gap = B ** s - A ** s
    # every coefficient is nonnegative and every monomial is a square
    u0 = []
    for mono, c in gap.items():
        half = tuple(x if t % 2 == 0 else x // 2 for t, x in enumerate(mono))
        u0.append((c, SparsePoly.from_terms(sp, {half: 1})))
    leaf = dag.leaf(SOSCertificate(gap, u0=u0, degree_bound=2 * s), note="raise weights to rho^-2k")
    root = dag.combine([Term(root), Term(leaf)], note="low-degree bound")
    dag.root = root
    W = fi.work
    gx = fi.function(1, n, frozenset())
    gx = gx.substitute({W.id(subset_label(1, S)): W.zero() for S in fi.subsets if len(S) > k})
    target = B ** s - MomentFunctional(moments, Fraction(1)).expect(fi, gx ** (2 * s))
    return dag, root, target
