"""Pure-Python versions of the polynomial hot loops.

A monomial is a flat tuple ``(v0, e0, v1, e1, ...)`` with strictly
increasing variable ids and positive exponents.  Term maps send monomials
to integer numerators; the shared denominator lives on the polynomial.
"""

from __future__ import annotations

BACKEND = "python"


def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    la, lb = len(a), len(b)
    i = j = 0
    out = []
    while i < la and j < lb:
        va, vb = a[i], b[j]
        if va == vb:
            out.append(va)
            out.append(a[i + 1] + b[j + 1])
            i += 2
            j += 2
        elif va < vb:
            out.append(va)
            out.append(a[i + 1])
            i += 2
        else:
            out.append(vb)
            out.append(b[j + 1])
            j += 2
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    return tuple(out)


def mul_terms(ta: dict, tb: dict) -> dict:
    if len(ta) < len(tb):
        ta, tb = tb, ta
    out: dict = {}
    get = out.get
    for mb, cb in tb.items():
        for ma, ca in ta.items():
            m = mono_mul(ma, mb)
            c = get(m, 0) + ca * cb
            if c:
                out[m] = c
            else:
                del out[m]
    return out


def lincomb_terms(parts: list) -> dict:
    """Sum of ``factor * terms`` over ``parts = [(terms, factor), ...]``."""
    out: dict = {}
    get = out.get
    for terms, factor in parts:
        if factor == 0:
            continue
        for m, c in terms.items():
            s = get(m, 0) + c * factor
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def eval_terms(terms: dict, nums: dict, scale: int, top: int) -> int:
    """Integer-scaled evaluation.

    Each variable takes the value ``nums[v] / scale``.  Returns
    ``scale**top * p(point)`` as an integer, with ``top`` at least the
    total degree of every term.
    """
    total = 0
    spow = [1]
    for _ in range(top):
        spow.append(spow[-1] * scale)
    for m, c in terms.items():
        val = c
        deg = 0
        for i in range(0, len(m), 2):
            e = m[i + 1]
            val *= nums[m[i]] ** e
            deg += e
        total += val * spow[top - deg]
    return total
