"""SOS certificates for the two-point inequality.

With ``rho* = 1 - 1/(2k)`` the polynomial

    P_k(a, b) = (1/4 + rho/4) ((1+a)^2k (1+b)^2k + (1-a)^2k (1-b)^2k)
              + (1/4 - rho/4) ((1+a)^2k (1-b)^2k + (1-a)^2k (1+b)^2k) - 1

is a sum of squares for every ``0 <= rho <= rho*``.  Writing ``s = a + b``
and ``t = ab`` (so that ``(a - b)^2 = s^2 - 4t``) gives
``P_k = sum_i Q_{k,i}(t) s^(2i)`` at ``rho = rho*``; each ``Q_{k,i}`` is a
nonnegative univariate polynomial, hence SOS, and every square ``g(t)^2``
lifts to ``(g(ab) (a+b)^i)^2``.  At ``rho = 0`` the product structure
``AB - 1 = (A-1)(B-1) + (A-1) + (B-1)`` gives the squares directly, and
intermediate ``rho`` follow by linearity.

Nonnegativity of the ``Q`` polynomials is settled exactly by Sturm
sequences.  The analytic argument (a trigonometric closed form for an
auxiliary sum ``S_k``, a linear bound far from zero and a Taylor bound
near zero) is mirrored by exact polynomial checks of every step that lives
in Q[t]; the transcendental facts it rests on (``cos x >= kappa(x)``,
``arctan(sqrt t) <= sqrt t``) are recorded, not machine-checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .certkit import (SOSCertificate, Verdict, sturm_nonneg, univariate_sos_decompose,
                      verify_certificate)
from .certkit.sturm import NonnegVerdict
from .polycore import IndeterminateSpace, SparsePoly, lincomb

AB = IndeterminateSpace(["a", "b"])
TSPACE = IndeterminateSpace(["t"])
RST = IndeterminateSpace(["a", "b", "r", "s", "t"])
HOM = IndeterminateSpace(["mu", "nu", "alpha", "beta"])

KAPPA_COEFFS = (Fraction(1), Fraction(-1, 2), Fraction(1, 24), Fraction(-1, 720))  # in x^0, x^2, x^4, x^6


def rho_star(k: int) -> Fraction:
    return 1 - Fraction(1, 2 * k)


@dataclass(frozen=True)
class TwoPointParams:
    k: int
    rho: Fraction

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError("k must be a positive integer")
        r = Fraction(self.rho)
        object.__setattr__(self, "rho", r)
        if not 0 <= r <= rho_star(self.k):
            raise ValueError(f"rho must lie in [0, {rho_star(self.k)}]")

    @property
    def rho_star(self) -> Fraction:
        return rho_star(self.k)


def _t() -> SparsePoly:
    return TSPACE.var("t")


def _weights(rho: Fraction) -> tuple[Fraction, Fraction]:
    return Fraction(1, 4) + Fraction(rho) / 4, Fraction(1, 4) - Fraction(rho) / 4


def four_block_form(space: IndeterminateSpace, X0, X1, Y0, Y1, k: int, rho: Fraction,
                    minus: SparsePoly | int = 1) -> SparsePoly:
    """``w+ (X0 Y0 + X1 Y1) + w- (X0 Y1 + X1 Y0) - minus`` with ``Xi = xi^2k`` etc."""
    wp, wm = _weights(rho)
    e = 2 * k
    A0, A1, B0, B1 = X0 ** e, X1 ** e, Y0 ** e, Y1 ** e
    return lincomb(space, [(wp, A0 * B0), (wp, A1 * B1), (wm, A0 * B1), (wm, A1 * B0)]) - minus


def build_P(params: TwoPointParams | int, rho: Fraction | None = None) -> SparsePoly:
    """``P_k(a, b)`` with weights ``1/4 +- rho/4`` (``rho`` defaults to ``rho*``)."""
    if not isinstance(params, TwoPointParams):
        params = TwoPointParams(params, rho_star(params) if rho is None else rho)
    a, b = AB.var("a"), AB.var("b")
    return four_block_form(AB, 1 + a, 1 - a, 1 + b, 1 - b, params.k, params.rho)


def build_P_unchecked(k: int, rho: Fraction) -> SparsePoly:
    """Same polynomial for any rational ``rho`` (used by sharpness probes)."""
    a, b = AB.var("a"), AB.var("b")
    return four_block_form(AB, 1 + a, 1 - a, 1 + b, 1 - b, k, Fraction(rho))


# --------------------------------------------------------------------------- Q family

def _q_poly(k: int, i: int, wa: Fraction, wb: Fraction) -> SparsePoly:
    """``wa C(2k,2i)(1+t)^(2k-2i) + wb sum_j C(2k,2j)(1-t)^(2k-2j) C(j,i)(-4t)^(j-i)``."""
    t = _t()
    parts = [(wa * comb(2 * k, 2 * i), (1 + t) ** (2 * k - 2 * i))]
    for j in range(i, k + 1):
        parts.append((wb * comb(2 * k, 2 * j) * comb(j, i), (1 - t) ** (2 * k - 2 * j) * (-4 * t) ** (j - i)))
    return lincomb(TSPACE, parts)


def q_polys(k: int, rho: Fraction) -> list[SparsePoly]:
    """``Q_{k,0..k}`` for an arbitrary weight ``rho`` (``rho*`` is the standard choice)."""
    wa, wb = Fraction(1, 2) + Fraction(rho) / 2, Fraction(1, 2) - Fraction(rho) / 2
    Q = [_q_poly(k, i, wa, wb) for i in range(k + 1)]
    Q[0] = Q[0] - 1
    return Q


def qtilde_polys(k: int) -> list[SparsePoly]:
    h = Fraction(1, 2)
    return [_q_poly(k, i, h, h) for i in range(k + 1)]


def q_sum(Q: list[SparsePoly]) -> SparsePoly:
    """``sum_i Q_i(ab) (a+b)^(2i)`` in the (a, b) space."""
    a, b = AB.var("a"), AB.var("b")
    ab, s2 = a * b, (a + b) ** 2
    parts = []
    sp = AB.const(1)
    for q in Q:
        parts.append((1, q.substitute({"t": ab}, AB) * sp))
        sp = sp * s2
    return lincomb(AB, parts)


class IdentityMismatch(AssertionError):
    pass


@dataclass
class QFamily:
    k: int
    Q: list
    Qtilde: list


def compute_Q(k: int) -> QFamily:
    if k < 1:
        raise ValueError("k must be positive")
    Q = q_polys(k, rho_star(k))
    if q_sum(Q) != build_P(k):
        raise IdentityMismatch(f"sum of Q_(k,i) s^2i differs from P_k at k={k}")
    fam = QFamily(k, Q, qtilde_polys(k))
    if fam.Qtilde[k] != 1:
        raise IdentityMismatch("Qtilde_(k,k) != 1")
    return fam


def rst_identity_holds() -> bool:
    """``(a-b)^2 = (a+b)^2 - 4ab`` after substituting r, s, t."""
    a, b = RST.var("a"), RST.var("b")
    r, s, t = RST.var("r"), RST.var("s"), RST.var("t")
    sub = {"r": a - b, "s": a + b, "t": a * b}
    return (r * r).substitute(sub) == (s * s - 4 * t).substitute(sub)


# --------------------------------------------------------------------------- S_k(t)

def S_poly(k: int) -> tuple[SparsePoly, SparsePoly]:
    """Numerator and denominator ``(1+t)^2k`` of ``S_k(t)``."""
    t = _t()
    num = lincomb(TSPACE, [(comb(2 * k, 2 * j), (1 - t) ** (2 * k - 2 * j) * (-4 * t) ** j) for j in range(k + 1)])
    return num, (1 + t) ** (2 * k)


def check_S_recurrence(k_max: int, middle: Fraction = Fraction(-2)) -> Verdict:
    """Exact check of ``(t+1)^2 S_(k+2) + middle (t^2-6t+1) S_(k+1) + (t+1)^2 S_k = 0``.

    Multiplying through by ``(1+t)^(2k+2)`` turns it into an identity of
    numerators, ``N_(k+2) + middle (t^2-6t+1) N_(k+1) + (1+t)^4 N_k = 0``.
    """
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    t = _t()
    lin = t * t - 6 * t + 1
    quart = (1 + t) ** 4
    nums = [S_poly(k)[0] for k in range(k_max + 1)]
    if nums[0] != 1 or nums[1] != lin:
        return Verdict.fail("residual", "initial values differ")
    for k in range(k_max - 1):
        if not (nums[k + 2] + lin * nums[k + 1] * middle + quart * nums[k]).is_zero():
            return Verdict.fail("residual", f"recurrence fails at k={k}", k)
    return Verdict.ok(f"recurrence holds for 0 <= k <= {k_max - 2}")


def check_Qtilde_recurrence(k_max: int) -> Verdict:
    """``(1+i)(1+k) Qt_(k+2,i+1) = (1+i)(2+k)(1+t)^2 Qt_(k+1,i+1) + (2+k)(2+2k-i) Qt_(k+1,i)``."""
    t = _t()
    rows = {k: qtilde_polys(k) for k in range(1, k_max + 3)}
    rows[0] = qtilde_polys(0)
    for k in range(k_max + 1):
        for i in range(k + 1):
            lhs = rows[k + 2][i + 1] * ((1 + i) * (1 + k))
            rhs = (1 + t) ** 2 * rows[k + 1][i + 1] * ((1 + i) * (2 + k)) + rows[k + 1][i] * ((2 + k) * (2 + 2 * k - i))
            if lhs != rhs:
                return Verdict.fail("residual", f"Qtilde recurrence fails at (k,i)=({k},{i})")
    return Verdict.ok(f"Qtilde recurrence holds for k <= {k_max}")


# --------------------------------------------------------------------------- nonnegativity

@dataclass
class NonnegEvidence:
    nonnegative: bool
    sturm: NonnegVerdict
    checks: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.nonnegative and all(self.checks.values())


def kappa_in_t(k: int) -> SparsePoly:
    """``kappa(4k sqrt t)`` as a polynomial in ``t`` (only even powers of x occur)."""
    t = _t()
    x2 = 16 * k * k * t
    return lincomb(TSPACE, [(c, x2 ** i) for i, c in enumerate(KAPPA_COEFFS)])


def case2_quadratic(k: int) -> SparsePoly:
    t = _t()
    k = Fraction(k)
    return (Fraction(-128, 45) * k ** 6) * t * t - ((Fraction(64, 45) * k - Fraction(16, 3)) * k ** 4) * t \
        + (Fraction(8, 3) * k - 4) * k * k


def case2_endpoint_value(k: int) -> Fraction:
    """``q(1/(2k(2k-1)))`` in closed form, visibly positive for ``k >= 2``."""
    k = Fraction(k)
    return 4 * k * k / (45 * (2 * k - 1) ** 2) * (187 + (k - 2) * (104 * k * k - 32 * k + 116))


def case2_endpoint_value_printed(k: int) -> Fraction:
    """The closed form as published; it disagrees with ``q`` at the endpoint (kept for comparison)."""
    k = Fraction(k)
    return 4 * k * k / (45 * (2 * k - 1) ** 2) * (19 + 136 * (k - 2) * ((k - Fraction(13, 34)) ** 2 + Fraction(103, 1156)))


def prove_Q0_nonneg(k: int, Q0: SparsePoly | None = None) -> NonnegEvidence:
    """Sturm decision for ``Q_{k,0}`` plus exact versions of the analytic steps."""
    if Q0 is None:
        Q0 = compute_Q(k).Q[0]
    verdict = sturm_nonneg(Q0)
    checks: dict[str, bool] = {}
    notes: dict = {}
    t = _t()
    kk = Fraction(k)
    num, den = S_poly(k)
    # Q_{k,0} = -1 + (1+t)^2k (1 - 1/4k + S_k/4k)
    checks["S_rewrite"] = Q0 == -1 + den * (1 - 1 / (4 * kk)) + num / (4 * kk)
    # Bernoulli: (1+t)^2k - 1 - 2kt has nonnegative coefficients
    checks["bernoulli"] = all(c >= 0 for _, c in (den - 1 - 2 * k * t).items())
    if k >= 2:
        t0 = 1 / (2 * kk * (2 * kk - 1))
        lin = -1 / (2 * kk) + (2 * kk - 1) * t
        checks["case1_bound"] = (-1 + (1 + 2 * k * t) * (1 - 1 / (2 * kk))) == lin
        checks["case1_nonneg"] = lin.eval({"t": t0}) >= 0 and lin.to_coeffs()[1] > 0
        q = case2_quadratic(k)
        lower = -1 + (1 + 2 * k * t) * (1 - 1 / (4 * kk) + kappa_in_t(k) / (4 * kk))
        checks["case2_taylor_identity"] = lower == q * t * t
        checks["case2_q0"] = q.eval({"t": 0}) >= 0
        checks["case2_endpoint_formula"] = q.eval({"t": t0}) == case2_endpoint_value(k)
        checks["case2_endpoint"] = case2_endpoint_value(k) >= 0
        checks["case2_concave"] = q.to_coeffs()[2] < 0
        # the cosine argument stays below 3 < pi, where cos is decreasing
        checks["case2_argument_range"] = 16 * kk * kk * t0 < 9
        notes["printed_endpoint_matches"] = q.eval({"t": t0}) == case2_endpoint_value_printed(k)
        notes["argument_below_sqrt2"] = 16 * kk * kk * t0 <= 2
    else:
        checks["k1_closed_form"] = Q0 == t * t
    return NonnegEvidence(verdict.nonnegative, verdict, checks, notes)


def prove_Qi_nonneg(k: int, i: int, fam: QFamily | None = None) -> NonnegEvidence:
    if not 1 <= i <= k:
        raise ValueError("need 1 <= i <= k")
    fam = fam or compute_Q(k)
    q, qt = fam.Q[i], fam.Qtilde[i]
    vt = sturm_nonneg(qt)
    v = sturm_nonneg(q)
    t = _t()
    rs = rho_star(k)
    block = (1 + t) ** (2 * k - 2 * i) * comb(2 * k, 2 * i)
    checks = {
        "qtilde_sturm": vt.nonnegative,
        "convex_combination": q == qt * (1 - rs) + block * rs,
        "qtilde_top_row": fam.Qtilde[k] == 1,
        "recurrence": bool(check_Qtilde_recurrence(max(k - 2, 0))) if k >= 2 else True,
        "qtilde_row0_sturm": sturm_nonneg(fam.Qtilde[0]).nonnegative,
    }
    return NonnegEvidence(v.nonnegative, v, checks)


# --------------------------------------------------------------------------- certificates

class CertificateError(RuntimeError):
    pass


def _lift(g: SparsePoly, i: int) -> SparsePoly:
    a, b = AB.var("a"), AB.var("b")
    return g.substitute({"t": a * b}, AB) * (a + b) ** i


def q_decomposition_squares(k: int, rho: Fraction | None = None) -> list:
    """Weighted squares in (a, b) from SOS decompositions of the ``Q_{k,i}``.

    A negative ``Q`` makes the decomposition fail; the failing index is
    reported instead of a certificate.
    """
    rho = rho_star(k) if rho is None else Fraction(rho)
    Q = q_polys(k, rho)
    squares = []
    for i, q in enumerate(Q):
        v = sturm_nonneg(q)
        if not v.nonnegative:
            raise CertificateError(f"Q_({k},{i}) is negative at t = {v.witness_point}")
        for c, g in univariate_sos_decompose(q, "t"):
            squares.append((c, _lift(g, i)))
    return squares


def rho_zero_squares(k: int) -> list:
    a, b = AB.var("a"), AB.var("b")
    out = []
    for i in range(1, k + 1):
        ci = comb(2 * k, 2 * i)
        out.append((Fraction(ci), a ** i))
        out.append((Fraction(ci), b ** i))
        for j in range(1, k + 1):
            out.append((Fraction(ci * comb(2 * k, 2 * j)), a ** i * b ** j))
    return out


_SQUARE_CACHE: dict = {}


def twopoint_certificate(params: TwoPointParams) -> SOSCertificate:
    k, rho = params.k, params.rho
    rs = rho_star(k)
    squares = []
    if rho != 0:
        key = ("star", k)
        if key not in _SQUARE_CACHE:
            _SQUARE_CACHE[key] = q_decomposition_squares(k)
        lam = rho / rs
        squares += [(lam * c, s) for c, s in _SQUARE_CACHE[key]]
    if rho != rs:
        lam0 = 1 - rho / rs
        squares += [(lam0 * c, s) for c, s in rho_zero_squares(k)]
    cert = SOSCertificate(build_P(params), u0=squares, degree_bound=4 * k)
    v = verify_certificate(cert)
    if not v:
        raise CertificateError(f"two-point certificate failed verification: {v.detail}")
    return cert


def homogenize_certificate(cert: SOSCertificate, params: TwoPointParams) -> SOSCertificate:
    """Map each square ``R(a,b)`` to ``mu^k nu^k R(alpha/mu, beta/nu)``."""
    k = params.k
    ia, ib = AB.id("a"), AB.id("b")
    mu, nu, al, be = (HOM.id(x) for x in ("mu", "nu", "alpha", "beta"))
    out = []
    for c, R in cert.u0:
        if R.degree_in("a") > k or R.degree_in("b") > k:
            raise CertificateError("square root exceeds per-variable degree k")
        terms = {}
        for m, coef in R.terms.items():
            ea = eb = 0
            for j in range(0, len(m), 2):
                if m[j] == ia:
                    ea = m[j + 1]
                elif m[j] == ib:
                    eb = m[j + 1]
            exps = {mu: k - ea, nu: k - eb, al: ea, be: eb}
            hm = tuple(x for v in sorted(exps) if exps[v] for x in (v, exps[v]))
            terms[hm] = coef
        out.append((c, SparsePoly(terms, R.den, HOM)))
    target = homogeneous_target(params)
    hc = SOSCertificate(target, u0=out, degree_bound=4 * k)
    v = verify_certificate(hc)
    if not v:
        raise CertificateError(f"homogenised certificate failed: {v.detail}")
    return hc


def homogeneous_target(params: TwoPointParams) -> SparsePoly:
    mu, nu, al, be = (HOM.var(x) for x in ("mu", "nu", "alpha", "beta"))
    k = params.k
    return four_block_form(HOM, mu + al, mu - al, nu + be, nu - be, k, params.rho,
                           minus=mu ** (2 * k) * nu ** (2 * k))


# --------------------------------------------------------------------------- the k = 3 puzzle

def puzzle_terms() -> list:
    """The appendix expression as ``(coefficient, square root)`` pairs."""
    a, b = AB.var("a"), AB.var("b")
    return [
        (Fraction(1), a ** 3 * b ** 3),
        (Fraction(15), (a + b) * (1 + b * a) ** 2),
        (Fraction(10), (a + b) ** 2 * (1 + b * a)),
        (Fraction(5), a ** 3 * b + b ** 2 + a ** 2 + a * b ** 3),
        (Fraction(35), a ** 2 * b ** 2),
        (Fraction(1), a ** 3 + b ** 3),
        (Fraction(17, 3), a ** 2 * b + a * b ** 2),
        (Fraction(35), a * b),
        (Fraction(148, 3), a * b ** 2),
        (Fraction(148, 3), a ** 2 * b),
    ]


def puzzle_expression_verbatim() -> SparsePoly:
    """The expression exactly as printed, expanded without using the square roots."""
    a, b = AB.var("a"), AB.var("b")
    return (a ** 6 * b ** 6 + 15 * (a + b) ** 2 * (1 + b * a) ** 4 + 10 * (a + b) ** 4 * (1 + b * a) ** 2
            + 5 * (a ** 3 * b + b ** 2 + a ** 2 + a * b ** 3) ** 2 + 35 * a ** 4 * b ** 4 + (a ** 3 + b ** 3) ** 2
            + Fraction(17, 3) * (a ** 2 * b + a * b ** 2) ** 2 + 35 * a ** 2 * b ** 2
            + Fraction(148, 3) * a ** 2 * b ** 4 + Fraction(148, 3) * a ** 4 * b ** 2)


def puzzle_check() -> dict:
    P3 = build_P(TwoPointParams(3, Fraction(5, 6)))
    expr = puzzle_expression_verbatim()
    terms = puzzle_terms()
    cert = SOSCertificate(P3, u0=terms, degree_bound=12)
    a1b2 = {"a": 1, "b": 2}
    wp, wm = _weights(Fraction(5, 6))
    return {
        "weights": (wp, wm),
        "residual_zero": (expr - P3).is_zero(),
        "squares_match_expression": lincomb(AB, [(c, s * s) for c, s in terms]) == expr,
        "nonneg_coefficients": all(c >= 0 for c, _ in terms),
        "certificate_valid": bool(verify_certificate(cert)),
        "eval_1_2": (expr.eval(a1b2), P3.eval(a1b2)),
        "certificate": cert,
    }
