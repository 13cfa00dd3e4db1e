"""Frankl-Rodl graphs: exact spectra and SOS refutations of dense independent sets.

``FR(n, gamma)`` joins ``x, y in {-1,1}^n`` at Hamming distance ``d = (1-gamma) n``
(``d`` even).  The refutation follows the Fourier argument: the edge axioms
kill ``<f0, S'_d f0> + <f1, S'_d f1>`` for the two parity parts of ``f``;
the exact per-level gap between ``S'_d = (S_d + S_(d+1))/2`` and ``T_rho'``
(``rho' = 1 - 2d/n``) turns this into a bound on a ``T_rho`` form after the
reflection ``g(x) = f(-x)``; Booleanity raises everything to the power
``2k``; reverse hypercontractivity and super Cauchy-Schwarz then bound
``E[f]^4k`` by ``2^(4k-1) delta``, which contradicts ``E[f] >= alpha`` once
``alpha^4k > 2^(4k-1) delta``.

At desk scale ``delta`` is computed exactly, replacing the asymptotic
operator-norm estimate, and the feasibility condition above replaces the
unspecified universal constant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb

from .certkit import ConstraintSystem, ProofDAG, SOSCertificate, Term
from .polycore import IndeterminateSpace, SparsePoly, lincomb
from .reversecert import ReverseBuilder, pair_weight, point_label, points


class InfeasibleThreshold(ValueError):
    def __init__(self, alpha: Fraction, minimal: Fraction, detail: str):
        super().__init__(detail)
        self.alpha, self.minimal = alpha, minimal


# --------------------------------------------------------------------------- instances

@dataclass(frozen=True)
class FRInstance:
    n: int
    gamma: Fraction

    def __post_init__(self):
        g = Fraction(self.gamma)
        object.__setattr__(self, "gamma", g)
        if not 0 < g <= Fraction(1, 2):
            raise ValueError("need 0 < gamma <= 1/2")
        d = (1 - g) * self.n
        if d.denominator != 1 or int(d) % 2:
            raise ValueError("(1 - gamma) n must be an even integer")
        if int(d) + 1 > self.n:
            raise ValueError("need d + 1 <= n")

    @property
    def d(self) -> int:
        return int((1 - self.gamma) * self.n)

    @property
    def N(self) -> int:
        return 2 ** self.n

    @property
    def rho(self) -> Fraction:
        """Correlation used by the reverse inequality, ``1 - 2 gamma``."""
        return 1 - 2 * self.gamma

    @property
    def rho_prime(self) -> Fraction:
        return 1 - Fraction(2 * self.d, self.n)

    @property
    def k(self) -> int:
        return ceil(1 / (4 * self.gamma))


def distance(x: tuple, y: tuple) -> int:
    return sum(a != b for a, b in zip(x, y))


def weight(x: tuple) -> int:
    return sum(v == -1 for v in x)


def edges(inst: FRInstance) -> list[tuple]:
    pts = points(inst.n)
    return [(x, y) for i, x in enumerate(pts) for y in pts[i + 1:] if distance(x, y) == inst.d]


# --------------------------------------------------------------------------- spectra

def krawtchouk(n: int, j: int, t: int) -> int:
    """``sum_{|U| = j} chi_U(x) chi_U(y)`` for ``x, y`` at distance ``t``."""
    return sum((-1) ** i * comb(t, i) * comb(n - t, j - i) for i in range(j + 1))


def sd_eigenvalue(n: int, d: int, j: int) -> Fraction:
    if not (0 <= d <= n and 0 <= j <= n):
        raise ValueError("need 0 <= d, j <= n")
    return Fraction(krawtchouk(n, d, j), comb(n, d))


def sd_eigenvalue_direct(n: int, d: int, j: int) -> Fraction:
    """``<chi_U, S_d chi_U>`` for ``U = {1..j}`` by averaging over all neighbourhoods."""
    pts = points(n)
    total = Fraction(0)
    for x in pts:
        cx = _chi(x, j)
        nb = [y for y in pts if distance(x, y) == d]
        total += cx * Fraction(sum(_chi(y, j) for y in nb), len(nb))
    return total / len(pts)


def _chi(x: tuple, j: int) -> int:
    p = 1
    for v in x[:j]:
        p *= v
    return p


@dataclass
class SpectralGap:
    n: int
    d: int
    rho: Fraction
    lambda_Sd: list
    lambda_Sdp: list
    delta: list
    delta_max: Fraction = field(init=False)
    delta_one_sided: Fraction = field(init=False)

    def __post_init__(self):
        self.delta_max = max(abs(x) for x in self.delta)
        self.delta_one_sided = max([Fraction(0)] + [-x for x in self.delta])


def spectral_gap(n: int, d: int, rho=None, direct: bool = False) -> SpectralGap:
    if d + 1 > n:
        raise ValueError("need d + 1 <= n")
    rho = 1 - Fraction(2 * d, n) if rho is None else Fraction(rho)
    ev = sd_eigenvalue_direct if direct else sd_eigenvalue
    lam = [ev(n, d, j) for j in range(n + 1)]
    lam1 = [ev(n, d + 1, j) for j in range(n + 1)]
    lamp = [(a + b) / 2 for a, b in zip(lam, lam1)]
    delta = [lp - rho ** j for j, lp in enumerate(lamp)]
    return SpectralGap(n, d, rho, lam, lamp, delta)


def apply_sd_direct(values: dict, n: int, d: int) -> dict:
    pts = points(n)
    out = {}
    for x in pts:
        nb = [values[y] for y in pts if distance(x, y) == d]
        out[x] = Fraction(sum(nb), len(nb))
    return out


def apply_sd_spectral(values: dict, n: int, d: int) -> dict:
    pts = points(n)
    subsets = [U for r in range(n + 1) for U in itertools.combinations(range(n), r)]

    def chi(U, x):
        p = 1
        for i in U:
            p *= x[i]
        return p

    N = len(pts)
    fhat = {U: Fraction(sum(values[x] * chi(U, x) for x in pts), N) for U in subsets}
    lam = [sd_eigenvalue(n, d, j) for j in range(n + 1)]
    return {x: sum(lam[len(U)] * fhat[U] * chi(U, x) for U in subsets) for x in pts}


# --------------------------------------------------------------------------- parity parts

def parity_split(fv: dict) -> tuple[dict, dict]:
    """Maps for ``f0``/``f1``: the variable where the Hamming weight has that parity, else ``None``."""
    f0 = {x: (v if weight(x) % 2 == 0 else None) for x, v in fv.items()}
    f1 = {x: (v if weight(x) % 2 == 1 else None) for x, v in fv.items()}
    return f0, f1


def reflect(fv: dict) -> dict:
    return {x: fv[tuple(-v for v in x)] for x in fv}


def fourier_coefficient(space: IndeterminateSpace, fv: dict, U: tuple) -> SparsePoly:
    """``hhat(U) = E[h(x) chi_U(x)]``: linear in the indeterminates."""
    N = len(fv)
    terms = {}
    for x, v in fv.items():
        if v is None:
            continue
        s = 1
        for i in U:
            s *= x[i]
        terms[(v, 1)] = terms.get((v, 1), 0) + Fraction(s, N)
    return SparsePoly.from_terms(space, terms)


def quadratic_form(space: IndeterminateSpace, fv: dict, gv: dict, kernel) -> SparsePoly:
    """``sum_{x,y} kernel(x, y) h(x) g(y)``."""
    terms: dict = {}
    for x, a in fv.items():
        if a is None:
            continue
        for y, b in gv.items():
            if b is None:
                continue
            c = kernel(x, y)
            if not c:
                continue
            m = (a, 2) if a == b else ((a, 1, b, 1) if a < b else (b, 1, a, 1))
            terms[m] = terms.get(m, 0) + c
    return SparsePoly.from_terms(space, terms)


def sprime_form(space, fv, inst: FRInstance) -> SparsePoly:
    """``<h, S'_d h>`` straight from the operator definition."""
    n, d, N = inst.n, inst.d, inst.N
    w = {d: Fraction(1, 2 * N * comb(n, d)), d + 1: Fraction(1, 2 * N * comb(n, d + 1))}
    return quadratic_form(space, fv, fv, lambda x, y: w.get(distance(x, y), 0))


def noise_form(space, fv, gv, rho: Fraction) -> SparsePoly:
    """``E[h(x) g(y)]`` over rho-correlated pairs."""
    return quadratic_form(space, fv, gv, lambda x, y: pair_weight(x, y, rho))


def level_weighted_norm(space, fv, n: int, c: list) -> SparsePoly:
    """``sum_U c(|U|) hhat(U)^2`` via the Krawtchouk kernel (no Fourier expansion)."""
    N = 2 ** n
    K = [sum(c[j] * krawtchouk(n, j, t) for j in range(n + 1)) for t in range(n + 1)]
    return quadratic_form(space, fv, fv, lambda x, y: Fraction(K[distance(x, y)], N * N))


# --------------------------------------------------------------------------- refutation

@dataclass
class RefutationConfig:
    alpha: Fraction
    k: int | None = None
    spectral_mode: str = "per_level"  # exact per-level identity, one-sided bound; "max" uses |delta|

    def __post_init__(self):
        self.alpha = Fraction(self.alpha)
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.spectral_mode not in ("max", "per_level"):
            raise ValueError("spectral_mode is 'max' or 'per_level'")


def delta_used(gap: SpectralGap, mode: str = "per_level") -> Fraction:
    return gap.delta_max if mode == "max" else gap.delta_one_sided


def feasible(inst: FRInstance, alpha, k: int | None = None, mode: str = "per_level") -> bool:
    k = k or inst.k
    gap = spectral_gap(inst.n, inst.d)
    return Fraction(alpha) ** (4 * k) > 2 ** (4 * k - 1) * delta_used(gap, mode)


def _iroot_ceil(num: int, den: int, e: int, grid: int) -> int:
    """Smallest integer ``t`` with ``(t/grid)^e > num/den``."""
    lo, hi = 0, 1
    while hi ** e * den <= num * grid ** e:
        hi *= 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if mid ** e * den > num * grid ** e:
            hi = mid
        else:
            lo = mid
    return hi


def min_refutable_density(inst: FRInstance, granularity: Fraction = Fraction(1, 1000),
                          mode: str = "per_level") -> Fraction:
    """Smallest multiple of ``granularity`` with ``alpha^4k > 2^(4k-1) delta``."""
    k = inst.k
    bound = 2 ** (4 * k - 1) * delta_used(spectral_gap(inst.n, inst.d), mode)
    g = Fraction(granularity)
    if g.numerator != 1:
        raise ValueError("granularity must be 1/m")
    t = _iroot_ceil(bound.numerator, bound.denominator, 4 * k, g.denominator)
    return t * g


def min_refutable_density_search(inst: FRInstance, granularity: Fraction = Fraction(1, 1000),
                                 mode: str = "per_level") -> Fraction:
    """The same threshold by bisection on the feasibility predicate."""
    g = Fraction(granularity)
    hi = 1
    while not feasible(inst, hi * g, mode=mode):
        hi *= 2
    lo = 0
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if feasible(inst, mid * g, mode=mode):
            hi = mid
        else:
            lo = mid
    return hi * g


@dataclass
class Refutation:
    inst: FRInstance
    cfg: RefutationConfig
    dag: ProofDAG
    system: ConstraintSystem
    gap: SpectralGap
    steps: dict
    axioms: dict


def frankl_rodl_system(inst: FRInstance, alpha: Fraction) -> tuple[ConstraintSystem, dict, dict]:
    space = IndeterminateSpace()
    fv = {x: space.ensure(point_label("f", x)) for x in points(inst.n)}
    system = ConstraintSystem(space)
    ax = {"bool": {}, "edge": {}}
    for x, v in fv.items():
        f = space.var(v)
        ax["bool"][x] = system.add_eq("bool:" + space.label(v), f * f - f)
    for x, y in edges(inst):
        lab = f"edge:{space.label(fv[x])}~{space.label(fv[y])}"
        ax["edge"][(x, y)] = system.add_eq(lab, space.var(fv[x]) * space.var(fv[y]))
    mean = lincomb(space, [(Fraction(1, inst.N), space.var(v)) for v in fv.values()])
    ax["density"] = system.add_ineq("density", mean - Fraction(alpha))
    return system, fv, ax


def _bool_multiplier(a: SparsePoly, b: SparsePoly, same: bool, p: int):
    """Pairs ``(which, multiplier)`` with ``a^p b^p - a b = sum mult * (v^2 - v)``."""
    if same:
        return [("a", lincomb(a.space, [(1, a ** i) for i in range(1, 2 * p - 1)]))]
    return [("a", lincomb(a.space, [(1, a ** i) for i in range(p - 1)]) * b ** p),
            ("b", a * lincomb(a.space, [(1, b ** i) for i in range(p - 1)]))]


def build_refutation(inst: FRInstance, cfg: RefutationConfig) -> Refutation:
    k = cfg.k or inst.k
    rho = inst.rho
    if rho > 1 - Fraction(1, 2 * k):
        raise ValueError("rho = 1 - 2 gamma exceeds the reverse-inequality range for this k")
    gap = spectral_gap(inst.n, inst.d)
    delta = delta_used(gap, cfg.spectral_mode)
    alpha = cfg.alpha
    slack = alpha ** (4 * k) - 2 ** (4 * k - 1) * delta
    if slack <= 0:
        m = min_refutable_density(inst, mode=cfg.spectral_mode)
        raise InfeasibleThreshold(alpha, m, f"alpha = {alpha} is not above the threshold; "
                                            f"smallest refutable alpha on the 1/1000 grid is {m}")
    system, fv, ax = frankl_rodl_system(inst, alpha)
    sp = system.space
    dag = ProofDAG(system)
    N, n = inst.N, inst.n
    steps: dict = {}
    f0, f1 = parity_split(fv)
    parts = (f0, f1)
    gparts = (reflect(f0), reflect(f1))
    var = sp.var

    # (1) edge axioms kill the S'_d forms of both parity parts
    c_edge = Fraction(1, N * comb(n, inst.d))
    steps["edge_zero"] = dag.combine([], {lab: sp.const(c_edge) for lab in ax["edge"].values()},
                                     note="<f0,S'f0> + <f1,S'f1> = 0")
    # (2) spectral transfer to T_rho'
    subsets = [U for r in range(n + 1) for U in itertools.combinations(range(n), r)]
    weights = [delta + dj for dj in gap.delta]
    u0 = []
    for h in parts:
        for U in subsets:
            if weights[len(U)]:
                u0.append((weights[len(U)], fourier_coefficient(sp, h, U)))
    spec_target = lincomb(sp, [(1, level_weighted_norm(sp, h, n, weights)) for h in parts])
    spec_leaf = dag.leaf(SOSCertificate(spec_target, u0=u0, degree_bound=2), note="Fourier squares")
    Tforms = [noise_form(sp, h, h, gap.rho) for h in parts]
    zero_node = steps["edge_zero"]
    if cfg.spectral_mode == "per_level":
        expr = [(1, [t]) for t in Tforms]
        for h in parts:
            for U in subsets:
                if gap.delta[len(U)]:
                    fc = fourier_coefficient(sp, h, U)
                    expr.append((gap.delta[len(U)], [fc, fc]))
        zero_node = steps["spectral_identity"] = dag.identity(zero_node, expr, note="exact per-level transfer")
    steps["spectral"] = dag.combine([Term(zero_node, poly=-sp.const(1)), Term(spec_leaf)],
                                    note="delta E[f^2] - <f0,T f0> - <f1,T f1> >= 0")
    # (3) reflection: <h, T_rho' h> = E_rho[h(x) h(-y)]
    energy = lincomb(sp, [(Fraction(1, N), var(v) ** 2) for v in fv.values()])
    expr = [(delta, [energy])]
    for h, g in zip(parts, gparts):
        for x, a in h.items():
            if a is None:
                continue
            for y, b in g.items():
                if b is not None:
                    expr.append((-pair_weight(x, y, rho), [var(a), var(b)]))
    steps["reflect"] = dag.identity(steps["spectral"], expr, note="g(x) = f(-x), rho = -rho'")
    # (4) Booleanity: f^2 = f gives f^2k g^2k = f g and E[f^2] = E[f]
    p = 2 * k
    acc: dict = {}
    for h, g in zip(parts, gparts):
        for x, a in h.items():
            if a is None:
                continue
            for y, b in g.items():
                if b is None:
                    continue
                w = pair_weight(x, y, rho)
                for which, mult in _bool_multiplier(var(a), var(b), a == b, p):
                    lab = system_label_bool(ax, h, g, x, y, which)
                    acc.setdefault(lab, []).append((-w, mult))
    for x in fv:
        acc.setdefault(ax["bool"][x], []).append((-delta / N, sp.const(1)))
    eqm = {lab: lincomb(sp, items) for lab, items in acc.items()}
    steps["boolean"] = dag.combine([Term(steps["reflect"])], eqm, note="Booleanity powers")
    # (5) reverse hypercontractivity for both parity parts (macros kept)
    builders = []
    roots = []
    for i, (h, g) in enumerate(zip(parts, gparts)):
        b = ReverseBuilder(dag, h, g, k, rho, fname=f"f{i}", gname=f"g{i}")
        roots.append(b.build(standalone=False))
        builders.append(b)
    steps["reverse_roots"] = tuple(roots)
    steps["reverse"] = dag.combine([Term(steps["boolean"])] + [Term(r) for r in roots],
                                   note="delta E[f] - sum E[fi]^2k E[gi]^2k >= 0")
    # (6) E[fi] = E[gi]
    eqs = []
    macros = []
    for b in builders:
        mf, mg = b.root_macros()
        macros.append((var(mf), var(mg)))
        mult = {lab: sp.const(c) for lab, c in b.mean_identity(0).items()}
        for lab, c in b.mean_identity(1).items():
            mult[lab] = sp.const(-c)
        eqs.append(dag.combine([], mult, note="E[fi] = E[gi]"))
    steps["mean_equal"] = tuple(eqs)
    # (7) replace E[gi] by E[fi] and delta E[f] by delta
    terms = [Term(steps["reverse"])]
    for (F, G), eid in zip(macros, eqs):
        h = lincomb(sp, [(1, G ** j * F ** (2 * k - 1 - j)) for j in range(2 * k)])
        terms.append(Term(eid, poly=-(F ** (2 * k)) * h))
    one_minus = [(delta / N, 1 - var(v)) for v in fv.values()]
    sq_target = lincomb(sp, [(c, s * s) for c, s in one_minus])
    terms.append(Term(dag.leaf(SOSCertificate(sq_target, u0=one_minus, degree_bound=2), note="(1-f)^2")))
    eqm = {ax["bool"][x]: sp.const(-delta / N) for x in fv}
    steps["delta_bound"] = dag.combine(terms, eqm, note="delta - E[f0]^4k - E[f1]^4k >= 0")
    # (8) super Cauchy-Schwarz on the two parity means
    (F0, _), (F1, _) = macros
    scs = dag.super_cs(F0, F1, 2 * k, note="super-CS")
    steps["super_cs"] = dag.combine([Term(steps["delta_bound"]), Term(scs, coeff=2)],
                                    note="delta - 2((E[f0]+E[f1])/2)^4k >= 0")
    # (9) E[f] macro, density axiom and powers lemma
    mid = sp.ensure("Ef()")
    Ef = var(mid)
    dlab = system.add_eq("def:Ef()", Ef - F0 - F1)
    mult = {dlab: sp.const(1)}
    for b in builders:
        for lab, c in b.mean_identity(0).items():
            mult[lab] = sp.const(c)
    dens = dag.axiom(ax["density"])
    steps["density_macro"] = dag.combine([Term(dens)], mult, note="E[f] - alpha >= 0")
    steps["powers"] = dag.powers(steps["density_macro"], alpha, 4 * k, note="E[f]^4k >= alpha^4k")
    X, Y = (F0 + F1) / 2, Ef / 2
    hXY = lincomb(sp, [(1, X ** j * Y ** (4 * k - 1 - j)) for j in range(4 * k)])
    steps["mean_bound"] = dag.combine([Term(steps["super_cs"])], {dlab: -hXY},
                                      note="2^(4k-1) delta >= E[f]^4k")
    # (10) contradiction
    scale = 1 / slack
    dag.root = steps["contradiction"] = dag.combine(
        [Term(steps["mean_bound"], coeff=2 ** (4 * k - 1) * scale), Term(steps["powers"], coeff=scale)],
        note="-1 >= 0")
    return Refutation(inst, cfg, dag, system, gap, steps, ax)


def system_label_bool(ax: dict, h: dict, g: dict, x: tuple, y: tuple, which: str) -> str:
    """Booleanity label of the variable behind ``h(x)`` (``which='a'``) or ``g(y)``."""
    if which == "a":
        return ax["bool"][x]
    return ax["bool"][tuple(-v for v in y)]


# --------------------------------------------------------------------------- ground truth

def max_independent_set(inst: FRInstance) -> tuple[int, list]:
    """Exact maximum independent set (size, vertices) via maximum clique in the complement."""
    import networkx as nx

    pts = points(inst.n)
    G = nx.Graph()
    G.add_nodes_from(range(len(pts)))
    G.add_edges_from((pts.index(x), pts.index(y)) for x, y in edges(inst))
    clique, size = nx.max_weight_clique(nx.complement(G), weight=None)
    return size, [pts[i] for i in sorted(clique)]


def vertex_cover_certificate(inst: FRInstance, granularity: Fraction = Fraction(1, 1000)) -> Fraction:
    """Certified lower bound ``N (1 - alpha_min)`` on the minimum vertex cover (may be vacuous)."""
    return inst.N * (1 - min_refutable_density(inst, granularity))
