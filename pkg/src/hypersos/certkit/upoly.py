"""Dense univariate helpers on ascending coefficient lists of Fractions."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

UPoly = list  # list[Fraction], ascending, no trailing zeros


def trim(p: Sequence) -> UPoly:
    q = [Fraction(c) for c in p]
    while q and q[-1] == 0:
        q.pop()
    return q


def deg(p: UPoly) -> int:
    return len(p) - 1  # -1 for zero


def add(p: UPoly, q: UPoly) -> UPoly:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def sub(p: UPoly, q: UPoly) -> UPoly:
    return add(p, [-c for c in q])


def scale(p: UPoly, c) -> UPoly:
    return trim([x * c for x in p])


def mul(p: UPoly, q: UPoly) -> UPoly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def divmod_(p: UPoly, q: UPoly) -> tuple[UPoly, UPoly]:
    if not q:
        raise ZeroDivisionError("division by the zero polynomial")
    r = list(p)
    dq = deg(q)
    lq = q[-1]
    quo = [Fraction(0)] * max(len(p) - dq, 0)
    while len(r) - 1 >= dq and r:
        shift = len(r) - 1 - dq
        c = r[-1] / lq
        quo[shift] = c
        for i, b in enumerate(q):
            r[shift + i] -= c * b
        r = trim(r)
    return trim(quo), r


def monic(p: UPoly) -> UPoly:
    return [c / p[-1] for c in p] if p else []


def gcd(p: UPoly, q: UPoly) -> UPoly:
    a, b = trim(p), trim(q)
    while b:
        a, b = b, divmod_(a, b)[1]
    return monic(a)


def derivative(p: UPoly) -> UPoly:
    return trim([i * p[i] for i in range(1, len(p))])


def evaluate(p: UPoly, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def primitive_positive(p: UPoly) -> UPoly:
    """Rescale by a positive rational to small integer coefficients."""
    if not p:
        return []
    from math import gcd as igcd, lcm

    den = 1
    for c in p:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for v in ints:
        g = igcd(g, v)
    return [Fraction(v // g) for v in ints]


def square_free_decomposition(p: UPoly) -> tuple[Fraction, list[UPoly]]:
    """Yun's algorithm: ``p = lc * prod(f[i] ** (i+1))`` with monic square-free ``f[i]``."""
    p = trim(p)
    if not p:
        raise ValueError("zero polynomial has no square-free decomposition")
    lc = p[-1]
    if deg(p) == 0:
        return lc, []
    a = monic(p)
    b = derivative(a)
    c = gcd(a, b)
    w = divmod_(a, c)[0]
    y = divmod_(b, c)[0]
    z = sub(y, derivative(w))
    factors: list[UPoly] = []
    while deg(w) > 0:
        g = gcd(w, z)
        factors.append(g)
        w = divmod_(w, g)[0]
        y = divmod_(z, g)[0]
        z = sub(y, derivative(w))
    while factors and deg(factors[-1]) == 0:
        factors.pop()
    return lc, factors


def cauchy_bound(p: UPoly) -> Fraction:
    """Every real root lies strictly inside ``(-B, B)``."""
    lc = abs(p[-1])
    return 1 + max((abs(c) / lc for c in p[:-1]), default=Fraction(0))
