#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Run from the repository root:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from schottkylab._kernels import _slow

try:
    from schottkylab._kernels import _fast
except ImportError:
    _fast = None

from schottkylab.moebius import MoebiusMap
from schottkylab.schottky import Circle, CirclePairing, SchottkyGroup


def four_circle_group(r=1.0):
    g1 = MoebiusMap.from_entries(3, 9 + r * r, 1, 3)
    g2 = MoebiusMap.from_entries(3j, r * r - 9, 1, 3j)
    circles = (Circle(-3, r), Circle(-3j, r), Circle(3, r), Circle(3j, r))
    return SchottkyGroup((g1, g2), CirclePairing(circles))


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    group = four_circle_group()
    letters = group.letter_matrices

    p = rng.standard_normal(400) + 1j * rng.standard_normal(400)
    q = rng.standard_normal(400) + 1j * rng.standard_normal(400)

    n_boxes = 20_000
    minx = rng.uniform(0, 100, n_boxes)
    miny = rng.uniform(0, 100, n_boxes)
    maxx = minx + rng.uniform(0.01, 0.5, n_boxes)
    maxy = miny + rng.uniform(0.01, 0.5, n_boxes)

    cases = [
        ("shell_displacements depth=10 (118k words)",
         lambda mod: mod.shell_displacements(letters, 10)),
        ("dfd 400x400",
         lambda mod: mod.dfd(p, q)),
        ("bbox_pairs n=20000",
         lambda mod: mod.bbox_pairs(minx, miny, maxx, maxy)),
    ]

    print(f"{'kernel':45s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, call in cases:
        t_slow = timeit(lambda: call(_slow))
        if _fast is None:
            print(f"{name:45s} {t_slow * 1e3:9.2f}ms {'n/a':>10s} {'n/a':>8s}")
            continue
        t_fast = timeit(lambda: call(_fast))
        print(
            f"{name:45s} {t_slow * 1e3:9.2f}ms {t_fast * 1e3:9.2f}ms "
            f"{t_slow / t_fast:7.1f}x"
        )


if __name__ == "__main__":
    main()
