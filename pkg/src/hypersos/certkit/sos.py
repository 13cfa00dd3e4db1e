"""Exact sum-of-squares decompositions of nonnegative univariate and
homogeneous bivariate polynomials.

Pipeline for a nonnegative ``p``: the square-free decomposition splits off
a perfect square ``S**2`` and leaves a strictly positive part ``w``.  For
``w`` we pick a rational ``eps`` with ``w - eps * sum t^(2i)`` still
positive (checked by Sturm), factor that numerically as ``|q(t)|**2`` from
its upper half-plane roots, and form the Gram matrix
``Re(q)Re(q)^T + Im(q)Im(q)^T + eps*I``.  The matrix is rounded to
rationals, projected exactly onto the affine space of Gram matrices of
``w``, and split by an exact LDL^T factorisation, which is positive
definite because of the ``eps`` margin.  Every result is re-expanded and
compared with the input before it is returned.
"""

from __future__ import annotations

import os
from fractions import Fraction

import mpmath

from ..polycore import IndeterminateSpace, PolyError, SparsePoly, lincomb
from . import upoly as U
from .sturm import SturmChain, sturm_nonneg

SOSList = list  # list[tuple[Fraction, SparsePoly]]

START_PREC = 128
PREC_CAP_ENV = "HYPERSOS_PRECISION_CAP"


class DecompositionError(RuntimeError):
    pass


def precision_cap() -> int:
    return int(os.environ.get(PREC_CAP_ENV, "4096"))


def sos_value(items: SOSList, space: IndeterminateSpace) -> SparsePoly:
    """Expand ``sum c * s**2``."""
    return lincomb(space, [(c, s * s) for c, s in items])


def ldl_psd(G: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[Fraction]] | None:
    """Exact ``G = L diag(d) L^T`` for a positive semidefinite rational ``G``.

    Zero pivots are allowed only when the remaining column vanishes.
    Returns ``None`` if ``G`` is not PSD.
    """
    n = len(G)
    A = [row[:] for row in G]
    L = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for j in range(n):
        piv = A[j][j]
        L[j][j] = Fraction(1)
        if piv < 0:
            return None
        if piv == 0:
            if any(A[i][j] != 0 for i in range(j + 1, n)):
                return None
            continue
        d[j] = piv
        for i in range(j + 1, n):
            L[i][j] = A[i][j] / piv
        for i in range(j + 1, n):
            lij = L[i][j]
            if lij:
                for k in range(j + 1, i + 1):
                    A[i][k] -= lij * L[k][j] * piv
                    A[k][i] = A[i][k]
    return L, d


def _gram_from_roots(w: U.UPoly, eps: Fraction, prec: int) -> list[list[Fraction]]:
    n = U.deg(w)
    half = n // 2
    we = list(w)
    for i in range(half + 1):
        we[2 * i] -= eps
    with mpmath.workprec(prec):
        coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(we)]
        roots = mpmath.polyroots(coeffs, maxsteps=200 + 20 * n, extraprec=prec)
        upper = sorted((r for r in roots if mpmath.im(r) > 0), key=lambda z: (mpmath.re(z), mpmath.im(z)))
        if len(upper) != half:
            raise DecompositionError("root pairing failed")
        q = [mpmath.mpc(mpmath.sqrt(coeffs[0]))]
        for z in upper:
            nxt = [mpmath.mpc(0)] * (len(q) + 1)
            for i, c in enumerate(q):
                nxt[i + 1] += c
                nxt[i] -= z * c
            q = nxt
        g = [mpmath.re(c) for c in q]
        h = [mpmath.im(c) for c in q]
        margin = max(0, -(eps.numerator.bit_length() - eps.denominator.bit_length()))
        bits = min(prec - 16, max(24, margin + 24 + prec // 8))
        scale = mpmath.mpf(2) ** bits
        G = []
        for i in range(half + 1):
            row = []
            for j in range(half + 1):
                v = g[i] * g[j] + h[i] * h[j]
                row.append(Fraction(int(mpmath.nint(v * scale)), 1 << bits))
            G.append(row)
    for i in range(half + 1):
        G[i][i] += eps
    # exact projection onto the anti-diagonal constraints
    for m in range(n + 1):
        cells = [(i, m - i) for i in range(max(0, m - half), min(m, half) + 1)]
        r = w[m] - sum(G[i][j] for i, j in cells)
        if r:
            adj = r / len(cells)
            for i, j in cells:
                G[i][j] += adj
    return G


def _choose_eps(w: U.UPoly) -> Fraction:
    half = U.deg(w) // 2
    eps = min(w[0], w[-1]) / 2
    for _ in range(400):
        we = list(w)
        for i in range(half + 1):
            we[2 * i] -= eps
        if we[-1] > 0 and we[0] > 0 and _no_real_roots(we):
            return eps
        eps /= 2
    raise DecompositionError("no positivity margin found")


def _no_real_roots(p: U.UPoly) -> bool:
    sq = U.divmod_(p, U.gcd(p, U.derivative(p)))[0]
    return U.deg(sq) <= 0 or SturmChain.build(sq).count_roots() == 0


def _positive_sos(w: U.UPoly, space: IndeterminateSpace, var: int) -> SOSList:
    """Weighted squares for a polynomial with no real roots and lc > 0."""
    if U.deg(w) == 0:
        return [(w[0], SparsePoly.constant(space, 1))]
    eps = _choose_eps(w)
    half = U.deg(w) // 2
    prec = START_PREC
    cap = precision_cap()
    while True:
        try:
            G = _gram_from_roots(w, eps, prec)
            res = ldl_psd(G)
        except (DecompositionError, ZeroDivisionError, mpmath.libmp.NoConvergence):
            res = None
        if res is not None and all(x > 0 for x in res[1]):
            L, d = res
            out = []
            for j in range(half + 1):
                col = [L[i][j] for i in range(half + 1)]
                out.append((d[j], SparsePoly.from_coeffs(space, var, col)))
            return out
        prec *= 2
        if prec > cap:
            raise DecompositionError(f"precision cap of {cap} bits exhausted")


def univariate_sos_decompose(p: SparsePoly, var=None) -> SOSList:
    """Return ``[(c_i, s_i)]`` with ``c_i >= 0`` rational and ``p = sum c_i s_i**2`` exactly."""
    space = p.space
    if var is None:
        v = p.univariate_var()
    else:
        v = space.id(var)
    if p.is_zero():
        return []
    if v is None:
        c = p.constant_term()
        if c < 0:
            raise DecompositionError("negative constant")
        return [(c, SparsePoly.constant(space, 1))]
    coeffs = p.to_coeffs(v)
    verdict = sturm_nonneg(coeffs)
    if not verdict.nonnegative:
        raise DecompositionError(f"not nonnegative: p({verdict.witness_point}) < 0")
    lc, facs = U.square_free_decomposition(coeffs)
    root = [Fraction(1)]
    w = [lc]
    for i, f in enumerate(facs):
        mult = i + 1
        for _ in range(mult // 2):
            root = U.mul(root, f)
        if mult % 2:
            w = U.mul(w, f)
    S = SparsePoly.from_coeffs(space, v, root)
    parts = [(c, S * s) for c, s in _positive_sos(w, space, v) if c]
    if sos_value(parts, space) != p:
        raise DecompositionError("exact re-verification failed")
    return parts


def bivariate_homog_sos_decompose(p: SparsePoly, x, y) -> SOSList:
    """SOS of a nonnegative homogeneous form in the two variables ``x, y``."""
    space = p.space
    xi, yi = space.id(x), space.id(y)
    if p.is_zero():
        return []
    if p.variables() - {xi, yi}:
        raise PolyError("form involves other variables")
    if not p.is_homogeneous():
        raise PolyError("polynomial is not homogeneous")
    D = p.degree()
    if D % 2:
        raise PolyError("odd degree form cannot be nonnegative")
    dehom = p.substitute({yi: 1})
    parts = univariate_sos_decompose(dehom, xi)
    out = []
    for c, s in parts:
        out.append((c, s.homogenize(yi, D // 2)))
    if sos_value(out, space) != p:
        raise DecompositionError("rehomogenised decomposition does not match")
    return out
