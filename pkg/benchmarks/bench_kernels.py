"""Benchmark: compiled distance kernels vs the NumPy fallback.

Times batch_distances on representative workloads (small Walsh-style rows,
large grid rows, both targets) and reports the speedup plus the worst
relative disagreement between the two backends.

Run:  python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from randclt import sphere
from randclt._kernels import _pykernels

try:
    from randclt._kernels import _ckernels
except ImportError:
    _ckernels = None


CASES = [
    # (label, rows, atoms, target kind, dim)
    ("walsh-like rows vs normal", 4096, 16, 0, 0),
    ("walsh-like rows vs typical", 4096, 16, 1, 15),
    ("empirical rows vs normal", 2048, 64, 0, 0),
    ("grid rows vs normal", 32, 1 << 16, 0, 0),
    ("grid rows vs typical", 8, 1 << 16, 1, 64),
]


def timed(fn, *args, repeats=3):
    best = math.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    if _ckernels is None:
        print("compiled backend not available; build with `pip install -e .`")
        return
    rng = np.random.default_rng(0)
    print(f"{'case':35s} {'python':>10s} {'cython':>10s} {'speedup':>8s} {'max rel gap':>12s}")
    for label, rows, atoms, kind, dim in CASES:
        vals = np.sort(rng.normal(0.0, 1.0, (rows, atoms)), axis=1)
        if kind == 0:
            scale, ezz = 1.0, _pykernels.NORMAL_MEAN_ABS_GAP
        else:
            scale = math.sqrt(dim)
            ezz = sphere.mean_abs_gap(dim, scale)
        t_py, a = timed(_pykernels.batch_distances, vals, kind, float(dim), scale, ezz)
        t_cy, b = timed(_ckernels.batch_distances, vals, kind, float(dim), scale, ezz)
        gap = float(np.max(np.abs(a - b) / (np.abs(a) + 1e-300)))
        print(f"{label:35s} {t_py:9.4f}s {t_cy:9.4f}s {t_py / t_cy:7.1f}x {gap:12.2e}")


if __name__ == "__main__":
    main()
