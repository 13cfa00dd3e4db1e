"""Command-line front end: ``hypersos <group> <verb> ...``.

Exit status: 0 on success, 1 when a verification (or feasibility) check
fails, 2 on bad input.  All numbers are exact rationals (``p/q`` or an
integer); decimal literals are rejected.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .certkit import ResourceExhausted, verify_certificate, verify_dag
from .certkit.io import (MalformedInput, certificate_to_dict, dag_to_dict, load_any, read_json,
                         write_json)
from .certkit.sos import PREC_CAP_ENV
from .polycore import PolyError, SparsePoly, parse_rational


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except PolyError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def rational_list(text: str) -> tuple:
    return tuple(rational(t) for t in text.split(","))


# --------------------------------------------------------------------------- reports

@dataclass
class Report:
    """Per-check status, sizes and output digests; timings stay out of the digest."""

    command: str
    checks: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def add(self, name: str, ok: bool, detail: str = "", **sizes) -> bool:
        self.checks.append({"name": name, "ok": bool(ok), "detail": detail, **sizes})
        return ok

    def add_file(self, path: Path) -> None:
        self.files[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest()

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def digest(self) -> str:
        body = json.dumps({"command": self.command, "checks": self.checks, "files": self.files},
                          sort_keys=True, default=str)
        return hashlib.sha256(body.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {"command": self.command, "ok": self.ok, "checks": self.checks, "files": self.files,
                "timings": self.timings, "digest": self.digest()}

    def text(self) -> str:
        lines = [f"[{'PASS' if c['ok'] else 'FAIL'}] {c['name']}" + (f": {c['detail']}" if c["detail"] else "")
                 for c in self.checks]
        lines += [f"wrote {p} sha256={d[:16]}" for p, d in self.files.items()]
        return "\n".join(lines)


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def _cert_sizes(cert) -> dict:
    return {"squares": cert.num_squares(), "terms": cert.total_terms()}


def _dag_sizes(dag) -> dict:
    leaves = [dag.nodes[i].cert for i in dag.leaves()]
    return {"nodes": len(dag), "squares": sum(c.num_squares() for c in leaves),
            "terms": sum(c.total_terms() for c in leaves)}


def _write_dag(dag, path: Path, target: SparsePoly | None, degree: int | None, report: Report) -> None:
    d = dag_to_dict(dag)
    d["meta"] = {"target": None if target is None else target.to_text(), "degree_bound": degree}
    write_json(d, path)
    report.add_file(path)


# --------------------------------------------------------------------------- verbs

def cmd_twopoint_gen(a, report: Report, out) -> None:
    from .twopoint import TwoPointParams, homogenize_certificate, twopoint_certificate

    params = TwoPointParams(a.k, a.rho)
    cert = twopoint_certificate(params)
    if a.homogeneous:
        cert = homogenize_certificate(cert, params)
    v = verify_certificate(cert, degree_bound=4 * a.k)
    report.add(f"two-point certificate k={a.k} rho={a.rho}", bool(v), v.detail or "verified",
               **_cert_sizes(cert))
    if a.out:
        write_json(certificate_to_dict(cert), a.out)
        back, system = load_any(a.out)[1]
        same = certificate_to_dict(back, system) == certificate_to_dict(cert)
        report.add("round trip", same, "re-parsed file matches")
        report.add_file(a.out)


def cmd_twopoint_qtable(a, report: Report, out) -> None:
    from .certkit import sturm_nonneg
    from .twopoint import q_polys, qtilde_polys, rho_star

    rho = rho_star(a.k) if a.rho is None else a.rho
    rows = []
    for i, (q, qt) in enumerate(zip(q_polys(a.k, rho), qtilde_polys(a.k))):
        rows.append({"k": a.k, "i": i, "rho": str(rho), "Q": q.to_text(), "Q_nonneg": sturm_nonneg(q).nonnegative,
                     "Qtilde": qt.to_text(), "Qtilde_nonneg": sturm_nonneg(qt).nonnegative})
    out.write(_csv(rows))
    report.add(f"Q table k={a.k}", True, f"{len(rows)} rows")


def cmd_twopoint_puzzle(a, report: Report, out) -> None:
    from .twopoint import puzzle_check

    r = puzzle_check()
    report.add("weights are 11/24 and 1/24", r["weights"] == (Fraction(11, 24), Fraction(1, 24)),
               f"{r['weights'][0]}, {r['weights'][1]}")
    report.add("expression equals P_3 exactly", r["residual_zero"])
    report.add("every term is a nonnegative multiple of a square",
               r["squares_match_expression"] and r["nonneg_coefficients"])
    report.add("certificate verifies", r["certificate_valid"])
    left, right = r["eval_1_2"]
    report.add("evaluation at (1, 2)", left == right, f"{left} = {right}")


def cmd_reverse_gen(a, report: Report, out) -> None:
    from .reversecert import inductive_certificate

    dag, exp = inductive_certificate(a.n, a.k, a.rho, g_equals_f=a.g_equals_f)
    v = verify_dag(dag, target=exp.target, degree_bound=4 * a.k)
    report.add(f"reverse DAG n={a.n} k={a.k} rho={a.rho}", bool(v), v.detail, **_dag_sizes(dag),
               leaves=len(dag.leaves()))
    if a.out:
        _write_dag(dag, a.out, exp.target, 4 * a.k, report)


def _verify_file(path, degree, report: Report) -> None:
    kind, obj = load_any(path)
    report.add_file(path)
    if kind == "cert":
        cert, system = obj
        v = verify_certificate(cert, system, degree_bound=degree)
        report.add(f"certificate {path}", bool(v), v.detail if v else f"{v.category}: {v.detail}",
                   **_cert_sizes(cert))
        return
    dag = obj
    meta = read_json(path).get("meta") or {}
    target = meta.get("target")
    target = SparsePoly.parse(dag.space, target) if target is not None else None
    deg = degree if degree is not None else meta.get("degree_bound")
    v = verify_dag(dag, target=target, degree_bound=deg)
    report.add(f"proof DAG {path}", bool(v), v.detail if v else f"{v.category}: {v.detail}", **_dag_sizes(dag))


def cmd_reverse_verify(a, report: Report, out) -> None:
    _verify_file(a.file, a.degree, report)


def cmd_verify(a, report: Report, out) -> None:
    _verify_file(a.file, a.degree, report)


def _moments(a):
    from .hypercert import MomentSequence

    if a.moments is None:
        return MomentSequence.rademacher(a.s)
    if a.moments == ("gaussian",):
        return MomentSequence.gaussian(a.s)
    return MomentSequence(a.s, a.moments)


def _moment_arg(text: str):
    if text in ("gaussian", "rademacher"):
        return (text,) if text == "gaussian" else None
    return rational_list(text)


def cmd_hyper_moments(a, report: Report, out) -> None:
    from .hypercert import double_factorial, moment_bound, remark_product_form

    rows = []
    for j in range(1, a.s + 1):
        b = moment_bound(a.s, j)
        rows.append({"s": a.s, "j": j, "moment_bound": str(b), "product_form": str(remark_product_form(a.s, j)),
                     "gaussian_moment": double_factorial(2 * j - 1), "gaussian_ok": double_factorial(2 * j - 1) <= b})
    out.write(_csv(rows))
    report.add(f"moment bounds s={a.s}", all(r["moment_bound"] == r["product_form"] for r in rows),
               "closed form matches product form")


def cmd_hyper_termwise(a, report: Report, out) -> None:
    from .hypercert import zfc_termwise_check

    rho2 = a.rho2 if a.rho2 is not None else Fraction(1, 2 * a.s - 1)
    v = zfc_termwise_check(a.s, rho2, _moments(a))
    report.add(f"termwise moment check s={a.s} rho^2={rho2}", bool(v), v.detail)


def cmd_hyper_identity(a, report: Report, out) -> None:
    from .hypercert import binomial_identity_check

    v = binomial_identity_check(a.smax)
    report.add(f"binomial identity s <= {a.smax}", bool(v), v.detail)


def cmd_hyper_gen(a, report: Report, out) -> None:
    from .hypercert import hypercon_certificate

    dag, target = hypercon_certificate(a.n, a.s, a.rho2, _moments(a))
    v = verify_dag(dag, target=target, degree_bound=2 * a.s)
    report.add(f"hypercontractivity DAG n={a.n} s={a.s} rho^2={a.rho2}", bool(v), v.detail, **_dag_sizes(dag))
    if a.out:
        _write_dag(dag, a.out, target, 2 * a.s, report)


def cmd_fr_spectrum(a, report: Report, out) -> None:
    from .franklrodl import FRInstance, spectral_gap

    inst = FRInstance(a.n, a.gamma)
    gap = spectral_gap(a.n, inst.d)
    rows = [{"n": a.n, "d": inst.d, "j": j, "lambda_Sd": str(gap.lambda_Sd[j]), "lambda_Sdp": str(gap.lambda_Sdp[j]),
             "rho_pow_j": str(gap.rho ** j), "delta": str(gap.delta[j])} for j in range(a.n + 1)]
    out.write(_csv(rows))
    report.add(f"spectrum FR({a.n}, {a.gamma})", gap.delta[0] == 0, f"delta_max = {gap.delta_max}")


def cmd_fr_refute(a, report: Report, out) -> None:
    from .franklrodl import FRInstance, InfeasibleThreshold, RefutationConfig, build_refutation

    inst = FRInstance(a.n, a.gamma)
    try:
        ref = build_refutation(inst, RefutationConfig(a.alpha, spectral_mode=a.mode))
    except InfeasibleThreshold as e:
        report.add(f"refutation of alpha={a.alpha}", False, f"infeasible; minimal refutable alpha {e.minimal}")
        return
    sp = ref.system.space
    v = verify_dag(ref.dag, target=sp.const(-1), degree_bound=4 * inst.k)
    report.add(f"refutation FR({a.n}, {a.gamma}) alpha={a.alpha}", bool(v), v.detail, **_dag_sizes(ref.dag))
    if a.out:
        _write_dag(ref.dag, a.out, sp.const(-1), 4 * inst.k, report)


def cmd_fr_minalpha(a, report: Report, out) -> None:
    from .franklrodl import FRInstance, max_independent_set, min_refutable_density, min_refutable_density_search, spectral_gap

    inst = FRInstance(a.n, a.gamma)
    g = a.granularity
    alpha = min_refutable_density(inst, g)
    search = min_refutable_density_search(inst, g)
    row = {"n": a.n, "gamma": str(a.gamma), "d": inst.d, "k": inst.k, "delta_max": str(spectral_gap(a.n, inst.d).delta_max),
           "alpha_min": str(alpha), "vertex_cover_bound": str(inst.N * (1 - alpha)), "max_is_density": ""}
    if a.n <= 6:
        size, _ = max_independent_set(inst)
        row["max_is_density"] = str(Fraction(size, inst.N))
        report.add("refutable densities exceed the true Max-IS density", Fraction(size, inst.N) < alpha)
    out.write(_csv([row]))
    report.add("closed form agrees with bisection", alpha == search, str(alpha))


def cmd_repro(a, report: Report, out) -> None:
    from .repro import CHECKS, run_all

    only = None if a.target == "all" else [a.target]
    if only and a.target not in CHECKS:
        raise UsageError(f"unknown check {a.target!r}; choose from all, {', '.join(CHECKS)}")
    for r in run_all(jobs=a.jobs, only=only):
        report.add(r.name, r.ok, r.detail)
        report.timings[r.name] = round(r.seconds, 3)


# --------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypersos", description="Exact SOS certificates and their verifier.",
                                epilog=f"Set {PREC_CAP_ENV} to cap the working precision (bits) of the SOS search.")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch runs")
    p.add_argument("--report", type=Path, help="write the JSON report here")
    p.add_argument("--quiet", action="store_true")
    sub = p.add_subparsers(dest="group", required=True)

    tp = sub.add_parser("twopoint").add_subparsers(dest="verb", required=True)
    g = tp.add_parser("gen")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--rho", type=rational, required=True)
    g.add_argument("--homogeneous", action="store_true")
    g.add_argument("--out", type=Path)
    g.set_defaults(func=cmd_twopoint_gen)
    g = tp.add_parser("qtable")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--rho", type=rational)
    g.set_defaults(func=cmd_twopoint_qtable)
    tp.add_parser("puzzle").set_defaults(func=cmd_twopoint_puzzle)

    rv = sub.add_parser("reverse").add_subparsers(dest="verb", required=True)
    g = rv.add_parser("gen")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--rho", type=rational, required=True)
    g.add_argument("--g-equals-f", action="store_true")
    g.add_argument("--out", type=Path)
    g.set_defaults(func=cmd_reverse_gen)
    g = rv.add_parser("verify")
    g.add_argument("file", type=Path)
    g.add_argument("--degree", type=int)
    g.set_defaults(func=cmd_reverse_verify)

    hy = sub.add_parser("hyper").add_subparsers(dest="verb", required=True)
    g = hy.add_parser("moments")
    g.add_argument("--s", type=int, required=True)
    g.set_defaults(func=cmd_hyper_moments)
    g = hy.add_parser("termwise")
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--rho2", type=rational)
    g.add_argument("--moments", type=_moment_arg, help="m2,m4,...,m2s or 'gaussian'")
    g.set_defaults(func=cmd_hyper_termwise)
    g = hy.add_parser("identity")
    g.add_argument("--smax", type=int, default=100)
    g.set_defaults(func=cmd_hyper_identity)
    g = hy.add_parser("gen")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--rho2", type=rational, required=True)
    g.add_argument("--moments", type=_moment_arg)
    g.add_argument("--out", type=Path)
    g.set_defaults(func=cmd_hyper_gen)

    fr = sub.add_parser("fr").add_subparsers(dest="verb", required=True)
    for name, func in (("spectrum", cmd_fr_spectrum), ("refute", cmd_fr_refute), ("minalpha", cmd_fr_minalpha)):
        g = fr.add_parser(name)
        g.add_argument("--n", type=int, required=True)
        g.add_argument("--gamma", type=rational, required=True)
        if name == "refute":
            g.add_argument("--alpha", type=rational, required=True)
            g.add_argument("--mode", choices=("per_level", "max"), default="per_level")
            g.add_argument("--out", type=Path)
        if name == "minalpha":
            g.add_argument("--granularity", type=rational, default=Fraction(1, 1000))
        g.set_defaults(func=func)

    g = sub.add_parser("verify", help="verify a certificate or proof DAG file")
    g.add_argument("file", type=Path)
    g.add_argument("--degree", type=int)
    g.set_defaults(func=cmd_verify)

    g = sub.add_parser("repro", help="run the acceptance checks")
    g.add_argument("target", nargs="?", default="all")
    g.set_defaults(func=cmd_repro)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    command = " ".join([a.group] + ([a.verb] if getattr(a, "verb", None) else []))
    report = Report(command)
    t = time.perf_counter()
    try:
        a.func(a, report, out)
    except (UsageError, MalformedInput, PolyError, ValueError, ResourceExhausted) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    report.timings["total"] = round(time.perf_counter() - t, 3)
    if not a.quiet:
        text = report.text()
        if text:
            print(text, file=sys.stderr if out is sys.stdout and _is_table(a) else out)
    if a.report:
        a.report.write_text(json.dumps(report.to_dict(), indent=2, default=str) + "\n", encoding="utf-8")
    return 0 if report.ok else 1


def _is_table(a) -> bool:
    return getattr(a, "func", None) in (cmd_twopoint_qtable, cmd_hyper_moments, cmd_fr_spectrum, cmd_fr_minalpha)


if __name__ == "__main__":
    sys.exit(main())
