"""Compare the compiled and pure-Python cyclotomic kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Part 1 times the multiply-accumulate kernel on random elements of Q(zeta_24).
Part 2 times the D4 genus-0 potential end to end in a subprocess per backend.
"""
import argparse
import os
import random
import subprocess
import sys
import time

from wce import _kernels_py
from wce.numfield import field

try:
    from wce import _kernels
except ImportError:
    _kernels = None


def random_pairs(n, d, rng):
    def elt():
        return tuple(rng.randint(-10**6, 10**6) for _ in range(d)), rng.choice([1, 2, 3, 6, 12, 35, 108])

    return [(elt(), elt()) for _ in range(n)]


def time_dot(impl, pairs, d, tail, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = impl.dot(pairs, d, tail)
        best = min(best, time.perf_counter() - t0)
    return best, out


END_TO_END = (
    "import time\n"
    "from wce.rootdata import build_root_datum\n"
    "from wce.fock import verified_generators\n"
    "from wce import tausolver as ts\n"
    "d = build_root_datum('D', 4)\n"
    "g, _ = verified_generators(d)\n"
    "t0 = time.perf_counter()\n"
    "tau = ts.solve_tau(d, g, truncation=18)\n"
    "print(time.perf_counter() - t0)\n"
)


def end_to_end(pure):
    env = dict(os.environ)
    env.pop("WCE_PURE_PYTHON", None)
    if pure:
        env["WCE_PURE_PYTHON"] = "1"
    res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
    return float(res.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=20000)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()
    fld = field(24)
    rng = random.Random(1)
    pairs = random_pairs(args.pairs, fld.degree, rng)
    t_py, r_py = time_dot(_kernels_py, pairs, fld.degree, fld.tail, args.repeat)
    print(f"dot, {args.pairs} products in Q(zeta_24)")
    print(f"  pure python : {t_py * 1e3:8.2f} ms")
    if _kernels is None:
        print("  compiled    : not built")
    else:
        t_c, r_c = time_dot(_kernels, pairs, fld.degree, fld.tail, args.repeat)
        assert r_c == r_py, "backends disagree"
        print(f"  compiled    : {t_c * 1e3:8.2f} ms  (speedup {t_py / t_c:.2f}x)")
    if not args.skip_end_to_end:
        print("D4 tau frontier to degree 3")
        print(f"  pure python : {end_to_end(True):8.3f} s")
        if _kernels is not None:
            print(f"  compiled    : {end_to_end(False):8.3f} s")


if __name__ == "__main__":
    main()
