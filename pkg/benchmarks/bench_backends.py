"""Compare the numba and pure-numpy Stein kernels.

    python3 benchmarks/bench_backends.py [--sizes 256,1024,4096] [--dim 1] [--repeat 3]

Prints one CSV row per (kernel, n): best wall time of each backend, the
speed-up, and the largest relative disagreement between the two results.
"""

import argparse
import sys
import time

import numpy as np

from ksdminimax import _accel, _kernels


def best_time(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="256,1024,4096")
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--gamma", type=float, default=1.0)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print("kernel,n,dim,numba_s,numpy_s,speedup,max_rel_diff")
    for n in (int(s) for s in args.sizes.split(",")):
        X = rng.normal(0.5, 1.0, size=(n, args.dim))
        S = -X
        m = max(1, int(np.ceil(np.sqrt(n))))
        cases = {
            "vsum": (X, S, args.gamma),
            "block_sym": (X, S, args.gamma),
            "block": (X[:m], S[:m], X, S, args.gamma),
        }
        for name, call_args in cases.items():
            _kernels.NUMBA_IMPL[name](*call_args)  # compile outside the timing
            t_nb, a = best_time(_kernels.NUMBA_IMPL[name], call_args, args.repeat)
            t_np, b = best_time(_kernels.NUMPY_IMPL[name], call_args, args.repeat)
            diff = float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
            print(f"{name},{n},{args.dim},{t_nb:.6f},{t_np:.6f},{t_np / t_nb:.2f},{diff:.2e}")


if __name__ == "__main__":
    main()
