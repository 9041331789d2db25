"""Time the compiled pair scans against the NumPy fallback.

    python benchmarks/bench_scan.py [--sizes 256 1024 4096] [--repeat 3]

Both backends must return identical results; the script exits non-zero otherwise.
"""
import argparse
import sys
import timeit

import numpy as np

from activescalar import _scan_py

try:
    from activescalar import _scan
except ImportError:
    _scan = None


def inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.arange(n) * 2 * np.pi / n
    theta = np.sin(x) + 0.3 * np.cos(3 * x) + 1e-3 * rng.standard_normal(n)
    lag = np.minimum(np.arange(n), n - np.arange(n)) * 2 * np.pi / n
    omega = np.full(n, np.inf)
    omega[1:] = 1.2 * np.sqrt(lag[1:])
    denom = np.full(n, np.inf)
    denom[1:] = lag[1:] ** 0.7
    return theta, omega, denom


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if _scan is None:
        print("compiled extension not built; nothing to compare")
        return 1
    print(f"{'scan':<10}{'n':>7}{'python [s]':>13}{'compiled [s]':>14}{'speedup':>10}")
    for n in args.sizes:
        theta, omega, denom = inputs(n)
        for name, arg in (("max_gap", omega), ("max_ratio", denom)):
            fast = getattr(_scan, f"{name}_scan")
            slow = getattr(_scan_py, f"{name}_scan")
            if fast(theta, arg) != slow(theta, arg):
                print(f"{name}: backends disagree at n={n}")
                return 2
            t_slow = min(timeit.repeat(lambda: slow(theta, arg), number=1, repeat=args.repeat))
            t_fast = min(timeit.repeat(lambda: fast(theta, arg), number=1, repeat=args.repeat))
            print(f"{name:<10}{n:>7}{t_slow:>13.4f}{t_fast:>14.5f}{t_slow / t_fast:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
