"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best wall time over ``--repeat`` runs and the speedup of
the compiled backend. Results are also checked for agreement.
"""
import argparse
import timeit

import numpy as np
from scipy import stats

from shapebg import _fallback

try:
    from shapebg import _core
except ImportError:
    _core = None


def _cases():
    rng = np.random.default_rng(0)
    x1k = np.sort(rng.normal(size=1000))
    x4k = np.sort(rng.normal(size=4000))
    t = np.linspace(-6, 6, 2001)
    h = np.geomspace(1.6, 0.04, 40)
    pts = np.linspace(-8, 10, 401)
    u = np.log(0.85 * stats.norm.pdf(pts) + 0.15 * stats.norm.pdf(pts, 3, 1))
    return [
        ("kde_sum n=1000 m=2001", "kde_sum", (x1k, t, 0.3)),
        ("kde_sum n=4000 m=2001", "kde_sum", (x4k, t, 0.3)),
        ("lscv_pair_sums n=1000 40 h", "lscv_pair_sums", (x1k, h, False)),
        ("lscv_pair_sums reflected n=1000", "lscv_pair_sums", (np.abs(x1k), h, True)),
        ("concave_touch_dp m=401", "concave_touch_dp", (pts, u, False)),
    ]


def _agree(a, b):
    if isinstance(a, tuple):
        return all(_agree(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-10, atol=1e-300)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _core is None:
        print("compiled core not built; only the fallback is timed")
    print(f"{'kernel':<34}{'python (s)':>12}{'compiled (s)':>14}{'speedup':>9}")
    for label, name, call_args in _cases():
        py = getattr(_fallback, name)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat))
        if _core is None:
            print(f"{label:<34}{t_py:>12.4f}{'-':>14}{'-':>9}")
            continue
        cy = getattr(_core, name)
        if not _agree(cy(*call_args), py(*call_args)):
            raise SystemExit(f"backends disagree on {label}")
        t_cy = min(timeit.repeat(lambda: cy(*call_args), number=1, repeat=args.repeat))
        print(f"{label:<34}{t_py:>12.4f}{t_cy:>14.4f}{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
