"""Exact sparse multivariate polynomials over the rationals.

Polynomials live in an :class:`IndeterminateSpace`, an append-only registry
of labelled variables with dense integer ids.  A :class:`SparsePoly` stores
integer numerators over one shared positive denominator, kept reduced, so
every value has a single canonical representation.  Rational constants are
:class:`fractions.Fraction` (aliased as :data:`BigRational`).

The inner loops (monomial merge, term products, linear combinations and
integer-scaled evaluation) are compiled from ``_kernels.pyx`` when the
extension is available; otherwise the identical pure-Python versions in
``_kernels_py`` are used.  Set ``HYPERSOS_PURE_PYTHON=1`` to force the
fallback.
"""

from __future__ import annotations

import math
import os
import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

if os.environ.get("HYPERSOS_PURE_PYTHON"):
    from . import _kernels_py as _k
else:
    try:
        from . import _kernels as _k  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        from . import _kernels_py as _k

BACKEND: str = _k.BACKEND
BigRational = Fraction
NEG_INF = float("-inf")  # degree of the zero polynomial

Scalar = Union[int, Fraction]
Var = Union[int, str]

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


class PolyError(ValueError):
    """Raised on malformed polynomial input or incompatible operands."""


def parse_rational(text: str) -> Fraction:
    """Parse ``num/den`` or an integer exactly; decimals are refused."""
    s = text.strip()
    if not _RATIONAL_RE.match(s):
        raise PolyError(f"not an exact rational: {text!r}")
    return Fraction(s)


def as_fraction(x: Scalar) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise PolyError(f"expected an exact rational, got {type(x).__name__}")


class IndeterminateSpace:
    """Ordered registry of variable labels with dense ids ``0..m-1``.

    The space only ever grows, so ids handed out earlier stay valid and
    polynomials built before an extension remain members of the space.
    """

    def __init__(self, labels: Iterable[str] = ()):
        self.labels: list[str] = []
        self._ids: dict[str, int] = {}
        for lab in labels:
            self.add(lab)

    def add(self, label: str) -> int:
        if label in self._ids:
            raise PolyError(f"duplicate label {label!r}")
        if (not label or label[0] in "+-" or any(ch in label for ch in " \t\n*^")
                or _RATIONAL_RE.match(label)):
            raise PolyError(f"illegal label {label!r}")
        self._ids[label] = len(self.labels)
        self.labels.append(label)
        return self._ids[label]

    def ensure(self, label: str) -> int:
        vid = self._ids.get(label)
        return self.add(label) if vid is None else vid

    def id(self, var: Var) -> int:
        if isinstance(var, str):
            try:
                return self._ids[var]
            except KeyError:
                raise PolyError(f"unknown variable {var!r}") from None
        if not 0 <= var < len(self.labels):
            raise PolyError(f"variable id {var} out of range")
        return var

    def label(self, vid: int) -> str:
        return self.labels[vid]

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    def __len__(self) -> int:
        return len(self.labels)

    def var(self, var: Var) -> "SparsePoly":
        return SparsePoly({(self.id(var), 1): 1}, 1, self)

    def const(self, c: Scalar) -> "SparsePoly":
        return SparsePoly.constant(self, c)

    def zero(self) -> "SparsePoly":
        return SparsePoly({}, 1, self)

    def __repr__(self) -> str:
        return f"IndeterminateSpace({len(self.labels)} vars)"


def _normalize(terms: dict, den: int) -> tuple[dict, int]:
    if not terms:
        return terms, 1
    if den < 0:
        terms = {m: -c for m, c in terms.items()}
        den = -den
    if den != 1:
        g = math.gcd(den, *terms.values())
        if g != 1:
            terms = {m: c // g for m, c in terms.items()}
            den //= g
    return terms, den


def mono_degree(m: tuple) -> int:
    return sum(m[1::2])


def _mono_key(m: tuple):
    vs = m[0::2]
    es = m[1::2]
    return (-sum(es), [(v, -e) for v, e in zip(vs, es)])


def mono_pow(m: tuple, e: int) -> tuple:
    return tuple(x * e if i % 2 else x for i, x in enumerate(m))


class SparsePoly:
    """Immutable exact polynomial: ``sum(terms[m] * x^m) / den``."""

    __slots__ = ("terms", "den", "space", "_hash")

    def __init__(self, terms: dict, den: int, space: IndeterminateSpace, normalized: bool = False):
        if not normalized:
            terms = {m: c for m, c in terms.items() if c}
            terms, den = _normalize(terms, den)
        self.terms = terms
        self.den = den
        self.space = space
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, space: IndeterminateSpace, c: Scalar) -> "SparsePoly":
        c = as_fraction(c)
        if c == 0:
            return cls({}, 1, space, True)
        return cls({(): c.numerator}, c.denominator, space, True)

    @classmethod
    def from_terms(cls, space: IndeterminateSpace, items: Mapping) -> "SparsePoly":
        """Build from ``{monomial: rational}`` (monomial as flat tuple or exponent dict)."""
        fr = {}
        for m, c in items.items():
            if isinstance(m, dict):
                ids = {space.id(v): e for v, e in m.items() if e}
                m = tuple(x for v in sorted(ids) for x in (v, ids[v]))
            c = as_fraction(c)
            if c:
                fr[m] = fr.get(m, 0) + c
        den = 1
        for c in fr.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        return cls({m: int(c * den) for m, c in fr.items()}, den, space)

    def _new(self, terms: dict, den: int) -> "SparsePoly":
        return SparsePoly(terms, den, self.space)

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.space is not self.space:
                raise PolyError("mismatched indeterminate spaces")
            return other
        return SparsePoly.constant(self.space, other)

    # inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_term(self) -> Fraction:
        return Fraction(self.terms.get((), 0), self.den)

    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(m[1::2]) for m in self.terms)

    def degree_in(self, var: Var):
        v = self.space.id(var)
        if not self.terms:
            return NEG_INF
        best = 0
        for m in self.terms:
            for i in range(0, len(m), 2):
                if m[i] == v:
                    best = max(best, m[i + 1])
        return best

    def variables(self) -> set[int]:
        out: set[int] = set()
        for m in self.terms:
            out.update(m[0::2])
        return out

    def is_homogeneous(self) -> bool:
        return len({sum(m[1::2]) for m in self.terms}) <= 1

    def coeff(self, mono) -> Fraction:
        if isinstance(mono, dict):
            mono = tuple(x for v in sorted(mono, key=self.space.id) for x in (self.space.id(v), mono[v]))
        return Fraction(self.terms.get(mono, 0), self.den)

    def items(self) -> list[tuple[tuple, Fraction]]:
        """Terms in canonical graded-lex order."""
        return [(m, Fraction(self.terms[m], self.den)) for m in sorted(self.terms, key=_mono_key)]

    def __len__(self) -> int:
        return len(self.terms)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other) -> "SparsePoly":
        o = self._coerce(other)
        if not o.terms:
            return self
        if not self.terms:
            return o
        d1, d2 = self.den, o.den
        if d1 == d2:
            return self._new(_k.lincomb_terms([(self.terms, 1), (o.terms, 1)]), d1)
        g = math.gcd(d1, d2)
        return self._new(_k.lincomb_terms([(self.terms, d2 // g), (o.terms, d1 // g)]), d1 // g * d2)

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        return SparsePoly({m: -c for m, c in self.terms.items()}, self.den, self.space, True)

    def __sub__(self, other) -> "SparsePoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SparsePoly":
        return (-self) + other

    def scale(self, c: Scalar) -> "SparsePoly":
        c = as_fraction(c)
        if c == 0:
            return SparsePoly({}, 1, self.space, True)
        return self._new({m: x * c.numerator for m, x in self.terms.items()}, self.den * c.denominator)

    def __mul__(self, other) -> "SparsePoly":
        if not isinstance(other, SparsePoly):
            return self.scale(other)
        o = self._coerce(other)
        if not self.terms or not o.terms:
            return SparsePoly({}, 1, self.space, True)
        return self._new(_k.mul_terms(self.terms, o.terms), self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, c: Scalar) -> "SparsePoly":
        c = as_fraction(c)
        if c == 0:
            raise ZeroDivisionError("polynomial division by zero")
        return self.scale(1 / c)

    def __pow__(self, e: int) -> "SparsePoly":
        if not isinstance(e, int) or e < 0:
            raise PolyError("exponent must be a nonnegative integer")
        if e == 0:
            return SparsePoly.constant(self.space, 1)
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            return self._new({mono_pow(m, e): c ** e}, self.den ** e)
        result = None
        base = self
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePoly):
            return self.space is other.space and self.den == other.den and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_term() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.den, frozenset(self.terms.items())))
        return self._hash

    # composition --------------------------------------------------------------
    def substitute(self, bindings: Mapping, space: IndeterminateSpace | None = None,
                   partial: bool = True) -> "SparsePoly":
        """Replace variables by polynomials.

        ``bindings`` maps variables of ``self.space`` to polynomials (or
        rationals) living in ``space`` (defaults to ``self.space``).  With
        ``partial=True`` unbound variables are kept, which requires the
        output space to be ``self.space``.
        """
        out_space = self.space if space is None else space
        bind: dict[int, SparsePoly] = {}
        for var, val in bindings.items():
            if not isinstance(val, SparsePoly):
                val = SparsePoly.constant(out_space, val)
            elif val.space is not out_space:
                raise PolyError("binding lives in the wrong space")
            bind[self.space.id(var)] = val
        used = self.variables()
        missing = used - set(bind)
        if missing and (not partial or out_space is not self.space):
            lab = self.space.label(min(missing))
            raise PolyError(f"unbound variable {lab!r}")
        for v in missing:
            bind[v] = SparsePoly({(v, 1): 1}, 1, out_space, True)

        cache: dict[tuple[int, int], SparsePoly] = {}

        def power(v: int, e: int) -> SparsePoly:
            key = (v, e)
            hit = cache.get(key)
            if hit is None:
                hit = bind[v] ** e
                cache[key] = hit
            return hit

        den = 1
        one = SparsePoly.constant(out_space, 1)
        prods = []
        for m, c in self.terms.items():
            acc = one
            for i in range(0, len(m), 2):
                acc = acc * power(m[i], m[i + 1])
                if not acc.terms:
                    break
            if acc.terms:
                prods.append((acc, c))
                den = den * acc.den // math.gcd(den, acc.den)
        parts = [(acc.terms, c * (den // acc.den)) for acc, c in prods]
        return SparsePoly(_k.lincomb_terms(parts), den * self.den, out_space)

    def rename(self, mapping: Mapping[int, int], space: IndeterminateSpace | None = None) -> "SparsePoly":
        """Fast variable-to-variable substitution (ids to ids)."""
        out_space = self.space if space is None else space
        terms: dict = {}
        for m, c in self.terms.items():
            exps: dict[int, int] = {}
            for i in range(0, len(m), 2):
                w = mapping.get(m[i], m[i])
                exps[w] = exps.get(w, 0) + m[i + 1]
            nm = tuple(x for w in sorted(exps) for x in (w, exps[w]))
            s = terms.get(nm, 0) + c
            if s:
                terms[nm] = s
            else:
                terms.pop(nm, None)
        return SparsePoly(terms, self.den, out_space)

    def eval(self, point: Mapping) -> Fraction:
        """Exact value at a rational point (all variables must be bound)."""
        vals: dict[int, Fraction] = {self.space.id(v): as_fraction(x) for v, x in point.items()}
        for v in self.variables():
            if v not in vals:
                raise PolyError(f"unbound variable {self.space.label(v)!r}")
        if not self.terms:
            return Fraction(0)
        scale = 1
        for x in vals.values():
            scale = scale * x.denominator // math.gcd(scale, x.denominator)
        nums = {v: x.numerator * (scale // x.denominator) for v, x in vals.items()}
        top = self.degree()
        total = _k.eval_terms(self.terms, nums, scale, top)
        return Fraction(total, self.den * scale ** top)

    def homogenize(self, aux: Var, degree: int) -> "SparsePoly":
        a = self.space.id(aux)
        if a in self.variables():
            raise PolyError("homogenizing variable must be fresh")
        if self.terms and degree < self.degree():
            raise PolyError("target degree below polynomial degree")
        terms = {}
        for m, c in self.terms.items():
            gap = degree - sum(m[1::2])
            if gap:
                m = _k.mono_mul(m, (a, gap))
            terms[m] = c
        return SparsePoly(terms, self.den, self.space, True)

    def dehomogenize(self, aux: Var) -> "SparsePoly":
        return self.substitute({aux: 1})

    def derivative(self, var: Var) -> "SparsePoly":
        v = self.space.id(var)
        terms: dict = {}
        for m, c in self.terms.items():
            for i in range(0, len(m), 2):
                if m[i] == v:
                    e = m[i + 1]
                    nm = m[:i] + m[i + 2:] if e == 1 else m[:i + 1] + (e - 1,) + m[i + 2:]
                    terms[nm] = terms.get(nm, 0) + c * e
        return self._new(terms, self.den)

    # univariate views -----------------------------------------------------
    def univariate_var(self) -> int | None:
        vs = self.variables()
        if len(vs) > 1:
            raise PolyError("polynomial is not univariate")
        return next(iter(vs)) if vs else None

    def to_coeffs(self, var: Var | None = None) -> list[Fraction]:
        """Dense ascending coefficient list in a single variable."""
        if var is None:
            v = self.univariate_var()
        else:
            v = self.space.id(var)
            if self.variables() - {v}:
                raise PolyError("polynomial is not univariate in the given variable")
        if not self.terms:
            return []
        deg = self.degree()
        out = [Fraction(0)] * (deg + 1)
        for m, c in self.terms.items():
            out[m[1] if m else 0] = Fraction(c, self.den)
        return out

    @classmethod
    def from_coeffs(cls, space: IndeterminateSpace, var: Var, coeffs: Iterable[Scalar]) -> "SparsePoly":
        v = space.id(var)
        return cls.from_terms(space, {((v, i) if i else ()): c for i, c in enumerate(coeffs) if c})

    # text format --------------------------------------------------------------
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        lab = self.space.labels
        chunks = []
        for idx, (m, c) in enumerate(self.items()):
            sign = "-" if c < 0 else "+"
            a = abs(c)
            factors = []
            if a != 1 or not m:
                factors.append(str(a))
            for i in range(0, len(m), 2):
                e = m[i + 1]
                factors.append(lab[m[i]] if e == 1 else f"{lab[m[i]]}^{e}")
            body = "*".join(factors)
            if idx == 0:
                chunks.append(("-" if sign == "-" else "") + body)
            else:
                chunks.append(f" {sign} {body}")
        return "".join(chunks)

    @classmethod
    def parse(cls, space: IndeterminateSpace, text: str, register: bool = False) -> "SparsePoly":
        """Inverse of :meth:`to_text`; terms are separated by `` + `` / `` - ``."""
        s = text.strip()
        if not s:
            raise PolyError("empty polynomial text")
        if s == "0":
            return space.zero()
        pieces = re.split(r" ([+-]) ", s)
        signs = ["+"] + pieces[1::2]
        bodies = pieces[0::2]
        acc: dict[tuple, Fraction] = {}
        for sign, body in zip(signs, bodies):
            body = body.strip()
            neg = sign == "-"
            if body.startswith("-"):
                neg, body = not neg, body[1:]
            coef = Fraction(1)
            exps: dict[int, int] = {}
            for j, fac in enumerate(body.split("*")):
                if not fac:
                    raise PolyError(f"malformed term {body!r}")
                if j == 0 and _RATIONAL_RE.match(fac):
                    coef = Fraction(fac)
                    continue
                if "^" in fac:
                    name, _, ex = fac.partition("^")
                    if not ex.isdigit() or int(ex) == 0:
                        raise PolyError(f"bad exponent in {fac!r}")
                    e = int(ex)
                else:
                    name, e = fac, 1
                if register:
                    vid = space.ensure(name)
                else:
                    vid = space.id(name)
                exps[vid] = exps.get(vid, 0) + e
            if neg:
                coef = -coef
            m = tuple(x for v in sorted(exps) for x in (v, exps[v]))
            acc[m] = acc.get(m, 0) + coef
        return cls.from_terms(space, acc)

    def __repr__(self) -> str:
        txt = self.to_text()
        if len(txt) > 200:
            txt = txt[:200] + " ..."
        return f"SparsePoly({txt})"

    __str__ = to_text


# free-function API -------------------------------------------------------------

def add(p: SparsePoly, q: SparsePoly) -> SparsePoly:
    return p + q


def mul(p: SparsePoly, q: SparsePoly) -> SparsePoly:
    return p * q


def power(p: SparsePoly, e: int) -> SparsePoly:
    return p ** e


def substitute(p: SparsePoly, bindings: Mapping, space: IndeterminateSpace | None = None) -> SparsePoly:
    return p.substitute(bindings, space)


def evaluate(p: SparsePoly, point: Mapping) -> Fraction:
    return p.eval(point)


def homogenize(p: SparsePoly, aux: Var, degree: int) -> SparsePoly:
    return p.homogenize(aux, degree)


def dehomogenize(p: SparsePoly, aux: Var) -> SparsePoly:
    return p.dehomogenize(aux)


def lincomb(space: IndeterminateSpace, parts: Iterable[tuple[Scalar, SparsePoly]]) -> SparsePoly:
    """Exact ``sum(c * p)`` in one accumulation pass."""
    items = []
    den = 1
    for c, p in parts:
        c = as_fraction(c)
        if c == 0 or not p.terms:
            continue
        if p.space is not space:
            raise PolyError("mismatched indeterminate spaces")
        d = c.denominator * p.den
        items.append((p.terms, c.numerator, d))
        den = den * d // math.gcd(den, d)
    return SparsePoly(_k.lincomb_terms([(t, n * (den // d)) for t, n, d in items]), den, space)


def even_binomial_pair(c: SparsePoly, d: SparsePoly, k: int) -> SparsePoly:
    """``sum_i C(2k,2i) c^(2k-2i) d^(2i)``, checked against ``((c+d)^2k + (c-d)^2k)/2``."""
    if k < 0:
        raise PolyError("k must be nonnegative")
    space = c.space
    d = c._coerce(d)
    c2, d2 = c * c, d * d
    cp = [SparsePoly.constant(space, 1)]
    dp = [SparsePoly.constant(space, 1)]
    for _ in range(k):
        cp.append(cp[-1] * c2)
        dp.append(dp[-1] * d2)
    out = lincomb(space, [(math.comb(2 * k, 2 * i), cp[k - i] * dp[i]) for i in range(k + 1)])
    direct = ((c + d) ** (2 * k) + (c - d) ** (2 * k)) / 2
    if out != direct:
        raise AssertionError("even binomial expansion disagrees with direct expansion")
    return out
