"""Compiled versus numpy kernels: timing and agreement.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from sinhlab import _kernels_py
from sinhlab.conformal import b_of, build_curve, vstar_of

try:
    from sinhlab import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _gamma1_case(x: float, size: int):
    b = b_of(x)
    y = b * (np.arange(1, size + 1) / (size + 1.0))
    return (x, vstar_of(x), y)


def _log_kernel_case(x: float, rows: int, cols: int):
    curve = build_curve(x)
    ys = curve.b * (np.arange(1, rows + 1) / (rows + 1.0))
    us = curve.b * (np.arange(1, cols + 1) / (cols + 1.0))
    sq_x = np.sqrt(np.asarray(curve.boundary_values(ys)[0]))
    sq_u = np.tile(np.sqrt(np.asarray(curve.boundary_values(us)[0])), (rows, 1))
    weights = np.full((rows, cols), 1.0 / cols)
    # keep the diagonal away from coincident points
    sq_u = sq_u * (1 + 1e-3j)
    return (sq_u, weights, sq_x)


def bench(name, args, repeat):
    py = getattr(_kernels_py, name)
    t_py = min(timeit.repeat(lambda: py(*args), number=1, repeat=repeat))
    ref = py(*args)
    if _ckernels is None:
        return t_py, float("nan"), float("nan")
    cy = getattr(_ckernels, name)
    t_cy = min(timeit.repeat(lambda: cy(*args), number=1, repeat=repeat))
    out = cy(*args)
    gap = float(np.max(np.abs(out - ref) / np.maximum(1.0, np.abs(ref))))
    return t_py, t_cy, gap


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    cases = [
        ("gamma1_solve", "x=2, 4096 targets", _gamma1_case(2.0, 4096)),
        ("gamma1_solve", "x=50, 4096 targets", _gamma1_case(50.0, 4096)),
        ("log_kernel_sums", "x=2, 256 x 512", _log_kernel_case(2.0, 256, 512)),
    ]
    print(f"{'kernel':<17} {'case':<20} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8} {'max gap':>9}")
    for name, label, case in cases:
        t_py, t_cy, gap = bench(name, case, args.repeat)
        speed = t_py / t_cy if t_cy == t_cy else float("nan")
        print(f"{name:<17} {label:<20} {1e3 * t_py:11.2f} {1e3 * t_cy:12.2f} {speed:8.1f} {gap:9.1e}")


if __name__ == "__main__":
    main()
