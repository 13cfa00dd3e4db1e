"""Exact real-root counting and the global nonnegativity decision."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..polycore import PolyError, SparsePoly
from . import upoly as U


@dataclass(frozen=True)
class SturmChain:
    """Signed remainder sequence of a square-free polynomial.

    Members are rescaled by positive rationals, which leaves every sign
    pattern (and hence every root count) unchanged.
    """

    polynomial: tuple
    chain: tuple

    @classmethod
    def build(cls, p: U.UPoly) -> "SturmChain":
        p = U.trim(p)
        if not p:
            raise ValueError("Sturm chain of the zero polynomial")
        seq = [U.primitive_positive(p)]
        d = U.derivative(p)
        if d:
            seq.append(U.primitive_positive(d))
        while len(seq) >= 2 and U.deg(seq[-1]) > 0:
            r = U.divmod_(seq[-2], seq[-1])[1]
            if not r:
                break
            seq.append(U.primitive_positive([-c for c in r]))
        return cls(tuple(p), tuple(tuple(s) for s in seq))

    def check(self) -> bool:
        """Re-verify the remainder relation between consecutive members."""
        seq = [list(s) for s in self.chain]
        if U.primitive_positive(list(self.polynomial)) != seq[0]:
            return False
        for i in range(2, len(seq)):
            r = U.divmod_(seq[i - 2], seq[i - 1])[1]
            if not r or U.primitive_positive([-c for c in r]) != seq[i]:
                return False
        return True

    def variations_at(self, x: Fraction) -> int:
        return _variations([U.evaluate(list(s), x) for s in self.chain])

    def variations_at_inf(self, sign: int) -> int:
        vals = []
        for s in self.chain:
            lc = s[-1]
            vals.append(lc if (sign > 0 or (len(s) - 1) % 2 == 0) else -lc)
        return _variations(vals)

    def count_roots(self, lo=None, hi=None) -> int:
        """Distinct real roots in ``(lo, hi]`` (``None`` means infinite)."""
        va = self.variations_at_inf(-1) if lo is None else self.variations_at(Fraction(lo))
        vb = self.variations_at_inf(1) if hi is None else self.variations_at(Fraction(hi))
        return va - vb


def _variations(vals) -> int:
    signs = [v > 0 for v in vals if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


@dataclass
class NonnegVerdict:
    nonnegative: bool
    witness_interval: tuple | None = None  # closed [lo, hi] on which p < 0
    witness_point: Fraction | None = None
    detail: str = ""
    chains: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.nonnegative


def _split_point(sq: U.UPoly, a: Fraction, b: Fraction) -> Fraction:
    """A rational strictly inside (a, b) that is not a root of ``sq``."""
    for num, den in ((1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (2, 5), (3, 5)):
        m = a + (b - a) * num / den
        if U.evaluate(sq, m) != 0:
            return m
    raise AssertionError("could not find a non-root split point")


def isolate_real_roots(p: U.UPoly) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals ``(a, b]`` each holding exactly one real root.

    Endpoints are never roots, so consecutive intervals are separated by
    root-free closed gaps.
    """
    p = U.trim(p)
    if U.deg(p) <= 0:
        return []
    _, facs = U.square_free_decomposition(p)
    sq = [Fraction(1)]
    for f in facs:
        sq = U.mul(sq, f)
    if U.deg(sq) <= 0:
        return []
    chain = SturmChain.build(sq)
    bound = U.cauchy_bound(sq)
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(-bound, bound)]
    while stack:
        a, b = stack.pop()
        n = chain.count_roots(a, b)
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        m = _split_point(sq, a, b)
        stack.append((m, b))
        stack.append((a, m))
    out.sort()
    return out


def _as_upoly(p) -> U.UPoly:
    if isinstance(p, SparsePoly):
        return p.to_coeffs()
    return U.trim(p)


def sturm_nonneg(p) -> NonnegVerdict:
    """Decide ``p(t) >= 0`` for all real ``t`` exactly.

    ``p`` is a univariate :class:`SparsePoly` (or an ascending coefficient
    list).  Nonnegative iff ``p`` is zero, or its leading coefficient is
    positive and every odd-multiplicity square-free factor is free of real
    roots.  Otherwise a closed rational interval on which ``p < 0`` is
    returned together with a point in it.
    """
    if isinstance(p, SparsePoly) and len(p.variables()) > 1:
        raise PolyError("sturm_nonneg needs a univariate polynomial")
    c = _as_upoly(p)
    if not c:
        return NonnegVerdict(True, detail="zero polynomial")
    lc, facs = U.square_free_decomposition(c)
    odd = [Fraction(1)]
    for i, f in enumerate(facs):
        if (i + 1) % 2 == 1:
            odd = U.mul(odd, f)
    chains = []
    if U.deg(odd) > 0:
        ch = SturmChain.build(odd)
        chains.append(ch)
        odd_roots = ch.count_roots()
    else:
        odd_roots = 0
    if lc > 0 and U.deg(c) % 2 == 0 and odd_roots == 0:
        return NonnegVerdict(True, detail="no sign change", chains=chains)
    # locate an interval of negativity between isolated roots
    roots = isolate_real_roots(c)
    bound = U.cauchy_bound(c)
    gaps = []
    if not roots:
        gaps.append((bound, bound + 1))
    else:
        gaps.append((-bound - 1, roots[0][0]))
        for (a1, b1), (a2, b2) in zip(roots, roots[1:]):
            gaps.append((b1, a2))
        gaps.append((roots[-1][1], bound + 1))
    for lo, hi in gaps:
        x = lo if lo == hi else lo + (hi - lo) / 2
        if U.evaluate(c, x) < 0:
            return NonnegVerdict(False, (lo, hi), x, detail="negative on a root-free gap", chains=chains)
    raise AssertionError("sign analysis inconsistent with root isolation")
