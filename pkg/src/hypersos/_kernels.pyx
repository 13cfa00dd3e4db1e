# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the polynomial hot loops (see _kernels_py)."""

BACKEND = "cython"


cpdef tuple mono_mul(tuple a, tuple b):
    cdef Py_ssize_t la = len(a), lb = len(b), i = 0, j = 0
    cdef long va, vb
    if la == 0:
        return b
    if lb == 0:
        return a
    cdef list out = []
    while i < la and j < lb:
        va = a[i]
        vb = b[j]
        if va == vb:
            out.append(va)
            out.append(<long>a[i + 1] + <long>b[j + 1])
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
    while i < la:
        out.append(a[i])
        i += 1
    while j < lb:
        out.append(b[j])
        j += 1
    return tuple(out)


cpdef dict mul_terms(dict ta, dict tb):
    if len(ta) < len(tb):
        ta, tb = tb, ta
    cdef dict out = {}
    cdef tuple ma, mb, m
    cdef object ca, cb, c
    for mb, cb in tb.items():
        for ma, ca in ta.items():
            m = mono_mul(ma, mb)
            c = out.get(m, 0) + ca * cb
            if c:
                out[m] = c
            else:
                del out[m]
    return out


cpdef dict lincomb_terms(list parts):
    cdef dict out = {}
    cdef dict terms
    cdef object factor, c, s
    cdef tuple m
    for terms, factor in parts:
        if factor == 0:
            continue
        for m, c in terms.items():
            s = out.get(m, 0) + c * factor
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


cpdef object eval_terms(dict terms, dict nums, object scale, long top):
    cdef list spow = [1]
    cdef long i, deg, e, n
    cdef object total = 0, val, cur = 1
    cdef tuple m
    for i in range(top):
        cur = cur * scale
        spow.append(cur)
    for m, c in terms.items():
        val = c
        deg = 0
        n = len(m)
        for i in range(0, n, 2):
            e = m[i + 1]
            val *= nums[m[i]] ** e
            deg += e
        total += val * spow[top - deg]
    return total
