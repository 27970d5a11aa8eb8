"""Compare the compiled and pure-numpy kernel backends.

    python benchmarks/bench_kernels.py [--rows 250000] [--repeat 3]

Prints best-of-N wall time per kernel and the speedup of the compiled
backend, and checks that both backends agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from robust_spc import _kernels_py
from robust_spc.estimators import MAD_CONSISTENCY, hd_weights

try:
    from robust_spc import _kernels
except ImportError:
    _kernels = None


def cases(rows: int, rng: np.random.Generator):
    x5 = rng.standard_normal((rows, 5))
    x50 = np.abs(rng.standard_normal((max(rows // 12, 100), 50)))
    w = hd_weights(50)
    return {
        "sd n=5": (lambda m: m.sd_rows(x5)),
        "mad n=5": (lambda m: m.mad_rows(x5)),
        "qn n=5": (lambda m: m.qn_rows(x5, False)),
        "qn-rc n=5": (lambda m: m.qn_rows(x5, True)),
        "mslog n=5": (lambda m: m.mslog_rows(x5, 0.5)[0]),
        "huber k=50": (lambda m: m.huber_rows(x50, 1.5, 1e-9, 500, MAD_CONSISTENCY)[0]),
        "hd k=50": (lambda m: m.hd_rows(x50, w)),
        "hl k=50": (lambda m: m.hl_rows(x50)),
    }


def best_time(fn, repeat: int) -> tuple[float, np.ndarray]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=250_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled backend not built; only the numpy backend is available")
    print(f"{'kernel':<12}{'numpy s':>10}{'cython s':>10}{'speedup':>9}{'max |diff|':>12}")
    for name, fn in cases(args.rows, np.random.default_rng(args.seed)).items():
        t_py, v_py = best_time(lambda: fn(_kernels_py), args.repeat)
        if _kernels is None:
            print(f"{name:<12}{t_py:>10.4f}")
            continue
        t_cy, v_cy = best_time(lambda: fn(_kernels), args.repeat)
        diff = float(np.max(np.abs(v_py - v_cy)))
        print(f"{name:<12}{t_py:>10.4f}{t_cy:>10.4f}{t_py / t_cy:>8.1f}x{diff:>12.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
