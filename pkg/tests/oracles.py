"""Independent reference implementations used as test oracles.

These deliberately avoid the production code paths: the linear solver is
a hand-written Gaussian elimination (the production path goes through
LAPACK), and the variogram oracle enumerates every pair in a plain loop.
"""

from __future__ import annotations

import math

import numpy as np


def gauss_solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting, no library solver."""
    a = np.array(matrix, dtype=float)
    b = np.array(rhs, dtype=float)
    n = b.size
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < 1e-300:
            raise ZeroDivisionError("singular matrix")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        for i in range(k + 1, n):
            if a[i, k] != 0.0:
                factor = a[i, k] / a[k, k]
                a[i, k + 1 :] -= factor * a[k, k + 1 :]
                b[i] -= factor * b[k]
                a[i, k] = 0.0
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


def brute_force_variogram(samples, max_lag: float, bin_width: float = 1.0):
    """All-pairs semivariogram by explicit double loop.

    Returns {bin_index: (gamma, pair_count)} using the same binning rule
    as the production estimator: pairs with separation d in (0, max_lag]
    land in bin floor(d / bin_width + 0.5).
    """
    pts = [(float(r), float(c), float(v)) for r, c, v in np.asarray(samples, dtype=float)]
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1])
            if d <= 0.0 or d > max_lag:
                continue
            idx = int(math.floor(d / bin_width + 0.5))
            sums[idx] = sums.get(idx, 0.0) + (pts[i][2] - pts[j][2]) ** 2
            counts[idx] = counts.get(idx, 0) + 1
    return {idx: (sums[idx] / (2.0 * counts[idx]), counts[idx]) for idx in sums}


def loop_mse(f: np.ndarray, g: np.ndarray) -> float:
    """Plain accumulation over every sample."""
    total = 0.0
    count = 0
    for a, b in zip(f.reshape(-1).tolist(), g.reshape(-1).tolist()):
        total += (float(a) - float(b)) ** 2
        count += 1
    return total / count
