"""Time the compiled kernels against the numpy fallbacks on identical inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--atoms K]
Each row checks that both backends agree before reporting timings.
"""
import argparse
import math
import timeit

import numpy as np

from salemkit import _kernels_py

try:
    from salemkit import _kernels as compiled
except ImportError:
    compiled = None


def cases(atoms, rng):
    pts = rng.integers(0, 1 << 20, size=(atoms, 1), dtype=np.int64)
    wf = rng.random(atoms)
    xi = rng.uniform(-1e4, 1e4, size=(2000, 1))
    wi = rng.integers(1, 100, size=atoms, dtype=np.int64)
    centers = rng.integers(0, 1 << 20, size=(500, 1), dtype=np.int64)
    grid = (rng.random((256, 256)) < 0.1).astype(np.int64)
    cum = np.concatenate([np.zeros((256, 1), dtype=np.int64), np.cumsum(grid, axis=1)], axis=1)
    cells = rng.integers(0, 256, size=(4000, 2), dtype=np.int64)
    return [
        ("exp_sum", lambda k: k.exp_sum(pts.astype(np.int64), wf, 1.0 / (1 << 20), xi), np.allclose),
        ("ball_sums", lambda k: k.ball_sums(pts, wi, centers, 1, (1 << 12) ** 2), np.array_equal),
        ("grid_disc_counts", lambda k: k.grid_disc_counts(cum, cells, 400), np.array_equal),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--atoms", type=int, default=20000)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for name, run, same in cases(args.atoms, rng):
        t_py = min(timeit.repeat(lambda: run(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:<18}{t_py:>14.2f}{'n/a':>14}{'n/a':>10}")
            continue
        if not same(np.asarray(run(_kernels_py)), np.asarray(run(compiled))):
            raise SystemExit(f"{name}: backends disagree")
        t_cy = min(timeit.repeat(lambda: run(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<18}{t_py:>14.2f}{t_cy:>14.2f}{t_py / t_cy if t_cy else math.inf:>10.1f}")


if __name__ == "__main__":
    main()
