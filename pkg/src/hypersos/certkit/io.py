"""JSON serialisation of certificates and proof DAGs.

Polynomials are stored in the polycore text format and rationals as
``num/den`` strings, so files are exact and diff cleanly.  Leaf
certificates shared by several DAG nodes are written once.
"""

from __future__ import annotations

import gzip
import json
from fractions import Fraction
from pathlib import Path

from ..polycore import IndeterminateSpace, PolyError, SparsePoly, parse_rational
from .cert import ConstraintSystem, SOSCertificate
from .dag import Node, ProofDAG, Term

CERT_FORMAT = "hypersos-cert/1"
DAG_FORMAT = "hypersos-dag/1"


class MalformedInput(ValueError):
    pass


def _q(c: Fraction) -> str:
    return str(Fraction(c))


def _sos_out(items) -> list:
    return [[_q(c), s.to_text()] for c, s in items]


def _constraints_out(system: ConstraintSystem) -> list:
    out = [{"label": lab, "kind": "ineq", "poly": p.to_text()} for lab, p in system.inequalities.items()]
    out += [{"label": lab, "kind": "eq", "poly": p.to_text()} for lab, p in system.equalities.items()]
    return out


def _cert_body(cert: SOSCertificate) -> dict:
    return {
        "target": cert.target.to_text(),
        "u0": _sos_out(cert.u0),
        "ineq_multipliers": {lab: _sos_out(v) for lab, v in cert.ineq_multipliers.items()},
        "eq_multipliers": {lab: v.to_text() for lab, v in cert.eq_multipliers.items()},
        "degree_bound": cert.degree_bound,
    }


def certificate_to_dict(cert: SOSCertificate, system: ConstraintSystem | None = None) -> dict:
    system = system or ConstraintSystem(cert.space)
    d = {"format": CERT_FORMAT, "space": list(cert.space.labels), "constraints": _constraints_out(system)}
    d.update(_cert_body(cert))
    return d


class _Reader:
    def __init__(self, space: IndeterminateSpace):
        self.space = space

    def poly(self, text) -> SparsePoly:
        if not isinstance(text, str):
            raise MalformedInput(f"expected polynomial text, got {type(text).__name__}")
        try:
            return SparsePoly.parse(self.space, text)
        except PolyError as e:
            raise MalformedInput(str(e)) from None

    def rat(self, text) -> Fraction:
        if isinstance(text, int) and not isinstance(text, bool):
            return Fraction(text)
        if not isinstance(text, str):
            raise MalformedInput(f"expected an exact rational, got {text!r}")
        try:
            return parse_rational(text)
        except PolyError as e:
            raise MalformedInput(str(e)) from None

    def sos(self, items) -> list:
        if not isinstance(items, list):
            raise MalformedInput("SOS list expected")
        out = []
        for it in items:
            if not isinstance(it, list) or len(it) != 2:
                raise MalformedInput("SOS entries are [coeff, poly] pairs")
            out.append((self.rat(it[0]), self.poly(it[1])))
        return out


def _space_and_system(d: dict) -> tuple[IndeterminateSpace, ConstraintSystem, _Reader]:
    labels = d.get("space")
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise MalformedInput("missing or bad 'space'")
    try:
        space = IndeterminateSpace(labels)
    except PolyError as e:
        raise MalformedInput(str(e)) from None
    rd = _Reader(space)
    system = ConstraintSystem(space)
    for c in d.get("constraints", []):
        try:
            kind, lab, poly = c["kind"], c["label"], rd.poly(c["poly"])
        except (KeyError, TypeError):
            raise MalformedInput("bad constraint entry") from None
        try:
            if kind == "ineq":
                system.add_ineq(lab, poly)
            elif kind == "eq":
                system.add_eq(lab, poly)
            else:
                raise MalformedInput(f"unknown constraint kind {kind!r}")
        except PolyError as e:
            raise MalformedInput(str(e)) from None
    return space, system, rd


def _cert_from_body(d: dict, rd: _Reader) -> SOSCertificate:
    try:
        deg = d["degree_bound"]
        if not isinstance(deg, int):
            raise MalformedInput("degree_bound must be an integer")
        return SOSCertificate(
            target=rd.poly(d["target"]),
            u0=rd.sos(d.get("u0", [])),
            ineq_multipliers={lab: rd.sos(v) for lab, v in d.get("ineq_multipliers", {}).items()},
            eq_multipliers={lab: rd.poly(v) for lab, v in d.get("eq_multipliers", {}).items()},
            degree_bound=deg,
        )
    except (KeyError, AttributeError, TypeError) as e:
        raise MalformedInput(f"bad certificate body: {e}") from None


def certificate_from_dict(d: dict) -> tuple[SOSCertificate, ConstraintSystem]:
    if not isinstance(d, dict) or d.get("format") != CERT_FORMAT:
        raise MalformedInput("not a certificate file")
    space, system, rd = _space_and_system(d)
    return _cert_from_body(d, rd), system


def dag_to_dict(dag: ProofDAG) -> dict:
    certs: list = []
    cert_ids: dict[int, int] = {}
    nodes = []
    for i, n in enumerate(dag.nodes):
        e: dict = {"id": i, "rule": n.rule, "rel": n.rel, "conclusion": n.conclusion.to_text()}
        if n.note:
            e["note"] = n.note
        if n.rule == "Axiom":
            e["label"] = n.label
        elif n.rule == "Square":
            e["poly"], e["coeff"] = n.poly.to_text(), _q(n.coeff)
        elif n.rule == "Leaf":
            key = id(n.cert)
            if key not in cert_ids:
                cert_ids[key] = len(certs)
                certs.append(_cert_body(n.cert))
            e["cert"] = cert_ids[key]
        elif n.rule in ("NonnegCombination", "ProductWithSOS"):
            ts = []
            for t in n.terms:
                te: dict = {"child": t.child, "coeff": _q(t.coeff)}
                if t.sos is not None:
                    te["sos"] = _sos_out(t.sos)
                if t.poly is not None:
                    te["poly"] = t.poly.to_text()
                if t.subst is not None:
                    te["subst"] = t.subst
                ts.append(te)
            e["terms"] = ts
            e["eq_multipliers"] = {lab: v.to_text() for lab, v in n.eq_multipliers.items()}
        elif n.rule == "SubstituteLinear":
            e["child"], e["subst"] = n.children[0], n.subst
        elif n.rule == "PolynomialIdentity":
            e["child"] = n.children[0]
            e["expr"] = [[_q(c), [f.to_text() for f in fs]] for c, fs in n.expr]
        elif n.rule == "PowersLemma":
            e["child"], e["c"], e["exponent"] = n.children[0], _q(n.coeff), n.exponent
        elif n.rule == "SuperCSLemma":
            e["x"], e["y"], e["k"] = n.x.to_text(), n.y.to_text(), n.k
        nodes.append(e)
    labels = dag.space.labels
    return {
        "format": DAG_FORMAT,
        "space": list(labels),
        "constraints": _constraints_out(dag.system),
        "substitutions": [{labels[v]: p.to_text() for v, p in s.items()} for s in dag.substitutions],
        "certificates": certs,
        "root": dag.root,
        "nodes": nodes,
    }


def dag_from_dict(d: dict) -> ProofDAG:
    if not isinstance(d, dict) or d.get("format") != DAG_FORMAT:
        raise MalformedInput("not a proof DAG file")
    space, system, rd = _space_and_system(d)
    dag = ProofDAG(system)
    try:
        for s in d.get("substitutions", []):
            dag.substitutions.append({space.id(lab): rd.poly(p) for lab, p in s.items()})
        certs = [_cert_from_body(c, rd) for c in d.get("certificates", [])]
        for e in d["nodes"]:
            r = e["rule"]
            n = Node(r, rd.poly(e["conclusion"]), e["rel"], note=e.get("note", ""))
            if r == "Axiom":
                n.label = e["label"]
            elif r == "Square":
                n.poly, n.coeff = rd.poly(e["poly"]), rd.rat(e["coeff"])
            elif r == "Leaf":
                n.cert = certs[e["cert"]]
            elif r in ("NonnegCombination", "ProductWithSOS"):
                for te in e["terms"]:
                    n.terms.append(Term(
                        child=te["child"], coeff=rd.rat(te["coeff"]),
                        sos=rd.sos(te["sos"]) if "sos" in te else None,
                        poly=rd.poly(te["poly"]) if "poly" in te else None,
                        subst=te.get("subst")))
                n.children = tuple(t.child for t in n.terms)
                n.eq_multipliers = {lab: rd.poly(v) for lab, v in e.get("eq_multipliers", {}).items()}
            elif r == "SubstituteLinear":
                n.children, n.subst = (e["child"],), e["subst"]
            elif r == "PolynomialIdentity":
                n.children = (e["child"],)
                n.expr = [(rd.rat(c), [rd.poly(f) for f in fs]) for c, fs in e["expr"]]
            elif r == "PowersLemma":
                n.children, n.coeff, n.exponent = (e["child"],), rd.rat(e["c"]), e["exponent"]
            elif r == "SuperCSLemma":
                n.x, n.y, n.k = rd.poly(e["x"]), rd.poly(e["y"]), e["k"]
            dag.nodes.append(n)
        dag.root = d["root"]
    except (KeyError, TypeError, IndexError, PolyError) as e:
        raise MalformedInput(f"bad DAG entry: {e}") from None
    return dag


def _open(path, mode: str):
    p = str(path)
    if p.endswith(".gz"):
        return gzip.open(p, mode + "t", encoding="utf-8")
    return open(p, mode, encoding="utf-8")


def write_json(obj: dict, path) -> None:
    with _open(path, "w") as fh:
        json.dump(obj, fh, indent=None, separators=(",", ":"))
        fh.write("\n")


def read_json(path) -> dict:
    try:
        with _open(path, "r") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError, EOFError) as e:
        raise MalformedInput(f"cannot read {Path(path).name}: {e}") from None


def load_any(path):
    """Return ``("cert", (cert, system))`` or ``("dag", dag)``."""
    d = read_json(path)
    fmt = d.get("format") if isinstance(d, dict) else None
    if fmt == CERT_FORMAT:
        return "cert", certificate_from_dict(d)
    if fmt == DAG_FORMAT:
        return "dag", dag_from_dict(d)
    raise MalformedInput("unrecognised file format")
