"""Time the hot kernels on the numba and numpy backends.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``STPCA_DISABLE_NUMBA``. Usage::

    python benchmarks/bench_kernels.py [--sizes 100 300 1000] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit


def worker(sizes, repeat):
    import numpy as np

    from stpca import kernels
    from stpca.geometry import sample_uniform_torus

    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        X = sample_uniform_torus(n, 3, rng)
        D = kernels.torus_pairwise(X)
        Z = rng.standard_normal((n, 4))
        s = rng.uniform(0, 3, n)
        x = X[0] + 0.1
        U = Z / np.linalg.norm(Z, axis=1, keepdims=True)
        cases = {
            "torus_pairwise": lambda: kernels.torus_pairwise(X),
            "stress": lambda: kernels.stress(Z, 1.5, D),
            "stress_grad": lambda: kernels.stress_grad(Z, 1.5, D),
            "predict_objective": lambda: kernels.predict_objective(x, X, s),
            "interp_objective": lambda: kernels.interp_objective(Z[0], U, s, 1.5),
        }
        for name, fn in cases.items():
            fn()  # compile / warm caches
            timer = timeit.Timer(fn)
            loops, _ = timer.autorange()
            best = min(timer.repeat(repeat, loops)) / loops
            rows.append({"kernel": name, "n": n, "seconds": best})
    json.dump({"backend": kernels.BACKEND, "rows": rows}, sys.stdout)


def run_backend(disable, sizes, repeat):
    env = dict(os.environ, STPCA_DISABLE_NUMBA="1" if disable else "0")
    cmd = [sys.executable, __file__, "--worker", "--sizes", *map(str, sizes), "--repeat", str(repeat)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True).stdout
    return json.loads(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 300, 1000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.sizes, args.repeat)
        return

    fast = run_backend(False, args.sizes, args.repeat)
    slow = run_backend(True, args.sizes, args.repeat)
    ref = {(r["kernel"], r["n"]): r["seconds"] for r in slow["rows"]}
    print(f"{'kernel':<18} {'n':>6} {fast['backend'] + ' (ms)':>12} {slow['backend'] + ' (ms)':>12} {'speedup':>8}")
    for r in fast["rows"]:
        base = ref[(r["kernel"], r["n"])]
        print(f"{r['kernel']:<18} {r['n']:>6} {1e3 * r['seconds']:>12.4f} {1e3 * base:>12.4f} {base / r['seconds']:>8.1f}")


if __name__ == "__main__":
    main()
