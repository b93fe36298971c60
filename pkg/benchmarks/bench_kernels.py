"""Compare the compiled and pure-numpy kernels on Monte Carlo-sized batches.

Run with ``python benchmarks/bench_kernels.py [--iters 20000] [--p 127]``.
"""
import argparse
import importlib
import time

import numpy as np

from taperfda import _kernels_py
from taperfda.teststats import HTParams


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--iters", type=int, default=20000)
    ap.add_argument("--p", type=int, default=127)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": _kernels_py}
    try:
        backends["cython"] = importlib.import_module("taperfda._kernels")
    except ImportError:
        print("compiled extension not built; timing the numpy fallback only")

    prm = HTParams.from_s(64, 1.0)
    x = _kernels_py.philox_normals(1, 0, args.iters, args.p)
    sq = x ** 2
    cases = {
        "philox_normals": lambda k: k.philox_normals(1, 0, args.iters, args.p),
        "adaptive_neyman": lambda k: k.adaptive_neyman(sq),
        "hard_threshold": lambda k: k.hard_threshold(
            x, prm.k_dstar, prm.k_star, prm.thresholds, prm.centring, False),
    }
    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases.items():
        t = {b: _best(lambda: fn(k), args.repeat) for b, k in backends.items()}
        speed = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{name:<18}" + "".join(f"{t[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")
    if "cython" in backends:
        same = np.array_equal(backends["cython"].philox_normals(1, 0, 100, args.p),
                              _kernels_py.philox_normals(1, 0, 100, args.p))
        print(f"normals bit-identical across backends: {same}")


if __name__ == "__main__":
    main()
