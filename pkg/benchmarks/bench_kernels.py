"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--rows 4096] [--pairs 200000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from engel_gmt import _kernels_py
from engel_gmt.geometry import DEFAULT_NORM, Ball
from engel_gmt.kernels import compiled_available
from engel_gmt.quadrature import BallPreimage
from engel_gmt.surfaces import chart_from_strings


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=4096)
    ap.add_argument("--pairs", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not compiled_available():
        print("compiled kernels not built; only the fallback is available")
        return
    from engel_gmt import _kernels as ext

    s = chart_from_strings(["u1", "u2 + u1^2/3", "u1*u2 - u2^2/4", "u1^3/5 + u2/2"])
    reg = BallPreimage(s, Ball((0.1, 0.0, 0.05, 0.0), 0.3, DEFAULT_NORM))
    rows = np.linspace(-1, 1, args.rows)
    a1, b1, a2, b2 = reg.window
    cases = {
        "row_intervals": (
            lambda m: m.row_intervals(reg.coef, reg.bounds, rows, a2, b2),
        ),
    }
    # the optimizers issue many tiny calls, where per-call overhead dominates
    few = np.linspace(-0.3, 0.3, 15)

    def small_calls(m):
        out = [m.row_intervals(reg.coef, reg.bounds, few, a2, b2) for _ in range(200)]
        return out[-1]

    cases["row_int x200 (15)"] = (small_calls,)
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, (args.pairs, 4))
    y = rng.uniform(-1, 1, (args.pairs, 4))
    q = DEFAULT_NORM
    xi = [float(v) for v in q.xi.as_tuple()]
    cases["bch_quasinorm"] = (lambda m: m.bch_quasinorm(x, y, *xi, q.kappa3, q.kappa4),)

    print(f"{'kernel':<20}{'compiled [s]':>14}{'fallback [s]':>14}{'speedup':>10}{'max rel diff':>14}")
    for name, (fn,) in cases.items():
        tc = best_of(lambda: fn(ext), args.repeat)
        tp = best_of(lambda: fn(_kernels_py), args.repeat)
        a, b = fn(ext), fn(_kernels_py)
        a = np.concatenate([np.ravel(v) for v in a]) if isinstance(a, tuple) else a
        b = np.concatenate([np.ravel(v) for v in b]) if isinstance(b, tuple) else b
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        print(f"{name:<20}{tc:>14.4f}{tp:>14.4f}{tp / tc:>10.1f}{diff:>14.1e}")


if __name__ == "__main__":
    main()
