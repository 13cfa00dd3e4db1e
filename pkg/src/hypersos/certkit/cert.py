"""Positivstellensatz certificates and their exact verifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..polycore import NEG_INF, IndeterminateSpace, PolyError, SparsePoly, lincomb

# failure categories reported by the verifiers
RESIDUAL = "residual"
DEGREE = "degree"
NEGATIVE = "negative_coefficient"
UNKNOWN_LABEL = "unknown_label"
SPACE = "space_mismatch"
MALFORMED = "malformed"
RULE = "rule"
CYCLE = "cycle"
DANGLING = "dangling"
SUBSTITUTION = "unsound_substitution"


class ResourceExhausted(RuntimeError):
    """A requested instance exceeds the configured size cap."""


@dataclass
class Verdict:
    valid: bool
    category: str | None = None
    detail: str = ""
    node: int | None = None

    def __bool__(self) -> bool:
        return self.valid

    @classmethod
    def ok(cls, detail: str = "") -> "Verdict":
        return cls(True, None, detail)

    @classmethod
    def fail(cls, category: str, detail: str, node: int | None = None) -> "Verdict":
        return cls(False, category, detail, node)


class ConstraintSystem:
    """Axioms ``q_i >= 0`` and ``r_j = 0`` over one shared space."""

    def __init__(self, space: IndeterminateSpace):
        self.space = space
        self.inequalities: dict[str, SparsePoly] = {}
        self.equalities: dict[str, SparsePoly] = {}

    def _check(self, label: str, poly: SparsePoly) -> None:
        if label in self.inequalities or label in self.equalities:
            raise PolyError(f"duplicate constraint label {label!r}")
        if poly.space is not self.space:
            raise PolyError("constraint lives in another space")

    def add_ineq(self, label: str, poly: SparsePoly) -> str:
        self._check(label, poly)
        self.inequalities[label] = poly
        return label

    def add_eq(self, label: str, poly: SparsePoly) -> str:
        self._check(label, poly)
        self.equalities[label] = poly
        return label

    def get(self, label: str) -> tuple[SparsePoly, str]:
        if label in self.inequalities:
            return self.inequalities[label], ">=0"
        if label in self.equalities:
            return self.equalities[label], "=0"
        raise KeyError(label)

    def __contains__(self, label: str) -> bool:
        return label in self.inequalities or label in self.equalities

    def labels(self) -> list[str]:
        return list(self.inequalities) + list(self.equalities)


def sos_degree(items) -> float:
    return max((2 * s.degree() for c, s in items if c and not s.is_zero()), default=NEG_INF)


@dataclass
class SOSCertificate:
    """``target = u0 + sum u_i q_i + sum v_j r_j`` with ``u`` given as weighted squares."""

    target: SparsePoly
    u0: list = field(default_factory=list)
    ineq_multipliers: dict = field(default_factory=dict)
    eq_multipliers: dict = field(default_factory=dict)
    degree_bound: int = 0

    @property
    def space(self) -> IndeterminateSpace:
        return self.target.space

    def labels_used(self) -> set[str]:
        return set(self.ineq_multipliers) | set(self.eq_multipliers)

    def num_squares(self) -> int:
        return len(self.u0) + sum(len(v) for v in self.ineq_multipliers.values())

    def total_terms(self) -> int:
        n = sum(len(s) for _, s in self.u0)
        n += sum(len(s) for v in self.ineq_multipliers.values() for _, s in v)
        n += sum(len(v) for v in self.eq_multipliers.values())
        return n


def _first_term(p: SparsePoly) -> str:
    if p.is_zero():
        return "0"
    m, c = p.items()[0]
    single = SparsePoly.from_terms(p.space, {m: c})
    return single.to_text()


def expand_certificate(cert: SOSCertificate, system: ConstraintSystem | None) -> SparsePoly:
    space = cert.space
    parts = [(c, s * s) for c, s in cert.u0]
    for lab, items in cert.ineq_multipliers.items():
        q = system.inequalities[lab]
        for c, s in items:
            parts.append((c, s * s * q))
    for lab, v in cert.eq_multipliers.items():
        parts.append((Fraction(1), v * system.equalities[lab]))
    return lincomb(space, parts)


def verify_certificate(cert: SOSCertificate, system: ConstraintSystem | None = None,
                       degree_bound: int | None = None) -> Verdict:
    """Exact check of the reconstruction identity, degree bounds and signs."""
    space = cert.space
    k = cert.degree_bound if degree_bound is None else degree_bound
    if system is None:
        system = ConstraintSystem(space)
    if system.space is not space:
        return Verdict.fail(SPACE, "certificate and constraint system use different spaces")
    for lab in cert.ineq_multipliers:
        if lab not in system.inequalities:
            return Verdict.fail(UNKNOWN_LABEL, f"no inequality labelled {lab!r}")
    for lab in cert.eq_multipliers:
        if lab not in system.equalities:
            return Verdict.fail(UNKNOWN_LABEL, f"no equality labelled {lab!r}")
    polys = [s for _, s in cert.u0] + [v for v in cert.eq_multipliers.values()]
    polys += [s for items in cert.ineq_multipliers.values() for _, s in items]
    if any(p.space is not space for p in polys):
        return Verdict.fail(SPACE, "a certificate polynomial lives in another space")
    for where, items in [("u0", cert.u0)] + [(f"u[{lab}]", v) for lab, v in cert.ineq_multipliers.items()]:
        for c, _ in items:
            if not isinstance(c, (int, Fraction)):
                return Verdict.fail(MALFORMED, f"non-rational coefficient in {where}")
            if c < 0:
                return Verdict.fail(NEGATIVE, f"negative coefficient {c} in {where}")
    if sos_degree(cert.u0) > k:
        return Verdict.fail(DEGREE, f"deg(u0) = {sos_degree(cert.u0)} > {k}")
    for lab, items in cert.ineq_multipliers.items():
        d = sos_degree(items) + system.inequalities[lab].degree()
        if d > k:
            return Verdict.fail(DEGREE, f"deg(u*q) = {d} > {k} for {lab!r}")
    for lab, v in cert.eq_multipliers.items():
        d = v.degree() + system.equalities[lab].degree()
        if d > k:
            return Verdict.fail(DEGREE, f"deg(v*r) = {d} > {k} for {lab!r}")
    residual = cert.target - expand_certificate(cert, system)
    if not residual.is_zero():
        return Verdict.fail(RESIDUAL, f"nonzero residual, leading term {_first_term(residual)}")
    return Verdict.ok()
