"""Compare the compiled and pure-Python polynomial kernels on typical workloads.

Run: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit
from fractions import Fraction

from hypersos import _kernels_py

try:
    from hypersos import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def random_terms(nvars: int, nterms: int, maxdeg: int, rng: random.Random) -> dict:
    out = {}
    while len(out) < nterms:
        vs = sorted(rng.sample(range(nvars), rng.randint(1, min(4, nvars))))
        mono = tuple(x for v in vs for x in (v, rng.randint(1, maxdeg)))
        out[mono] = rng.randint(-50, 50) or 1
    return out


def workloads(rng: random.Random):
    a = random_terms(12, 300, 3, rng)
    b = random_terms(12, 300, 3, rng)
    parts = [(random_terms(12, 200, 3, rng), rng.randint(1, 9)) for _ in range(20)]
    big = random_terms(16, 4000, 4, rng)
    nums = {v: rng.randint(-21, 21) for v in range(16)}
    return {
        "mul_terms 300x300": lambda k: k.mul_terms(a, b),
        "lincomb_terms 20x200": lambda k: k.lincomb_terms(parts),
        "eval_terms 4000 terms": lambda k: k.eval_terms(big, nums, 7, 16),
    }


END_TO_END = """
import time
from fractions import Fraction
from hypersos import BACKEND
from hypersos.franklrodl import FRInstance, RefutationConfig, build_refutation
from hypersos.certkit import verify_dag
t = time.perf_counter()
ref = build_refutation(FRInstance(6, Fraction(1, 3)), RefutationConfig(Fraction(6, 5)))
assert verify_dag(ref.dag)
print(BACKEND, time.perf_counter() - t)
"""


def end_to_end() -> None:
    print("\nFR(6, 1/3) refutation, build + verify:")
    for pure in ("", "1"):
        env = dict(os.environ, HYPERSOS_PURE_PYTHON=pure) if pure else {
            k: v for k, v in os.environ.items() if k != "HYPERSOS_PURE_PYTHON"}
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:10s} {float(secs):8.2f} s")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true", help="also time a full refutation per backend")
    args = ap.parse_args()
    rng = random.Random(0)
    print(f"{'kernel':24s} {'python (ms)':>12s} {'compiled (ms)':>14s} {'speedup':>8s}")
    for name, fn in workloads(rng).items():
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _kernels_c is None:
            print(f"{name:24s} {tp:12.2f} {'n/a':>14s} {'n/a':>8s}")
            continue
        assert fn(_kernels_py) == fn(_kernels_c), name
        tc = min(timeit.repeat(lambda: fn(_kernels_c), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:24s} {tp:12.2f} {tc:14.2f} {tp / tc:7.2f}x")
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
