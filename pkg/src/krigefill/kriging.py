"""Ordinary-kriging system assembly and solution for a single target position.

The estimate at a target is a weighted sum of known values whose weights
sum to one (unbiasedness under an unknown constant mean) and minimize the
estimation variance. Enforcing the constraint with a Lagrange multiplier
gives the bordered linear system

    [ G   1 ] [ w  ]   [ g ]
    [ 1T  0 ] [ mu ] = [ 1 ]

where G holds model semivariances between known points and g the
semivariances from each known point to the target. Because gamma(0) = 0,
a target that coincides with a known point reproduces that value exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .variogram import VariogramModel, model_gamma

__all__ = [
    "KrigingSystem",
    "KrigingSolution",
    "assemble_system",
    "solve_weights",
    "predict",
]

# A LU pivot smaller than this marks the system as near-singular.
PIVOT_TOL = 1e-12

# Relative jitter added to off-diagonal semivariances on the retry pass.
JITTER = 1e-6


@dataclass(frozen=True, eq=False)
class KrigingSystem:
    """Assembled bordered system for one target.

    matrix is (N+1, N+1): the N x N semivariance block, a border of ones,
    and a zero corner. rhs is the target semivariance vector extended
    with 1. positions/values hold the N known samples; sill is the model
    sill, kept for the near-singularity jitter retry.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    positions: np.ndarray
    values: np.ndarray
    target: tuple[float, float]
    sill: float

    def __post_init__(self) -> None:
        n = self.values.shape[0]
        if n < 1:
            raise ValueError("system needs at least one known point")
        if self.matrix.shape != (n + 1, n + 1):
            raise ValueError(f"matrix shape {self.matrix.shape} does not fit {n} points")
        if self.rhs.shape != (n + 1,):
            raise ValueError(f"rhs shape {self.rhs.shape} does not fit {n} points")
        if self.positions.shape != (n, 2):
            raise ValueError(f"positions shape {self.positions.shape} does not fit {n} points")

    @property
    def size(self) -> int:
        """Number of known points N."""
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class KrigingSolution:
    """Weights part of a kriging solve.

    weights sum to one; lagrange is the multiplier; target_gammas are the
    model semivariances from each known point to the target (needed for
    the estimation variance); degraded marks the inverse-distance
    fallback taken when the system was numerically singular.
    """

    weights: np.ndarray
    lagrange: float
    target_gammas: np.ndarray
    degraded: bool = False


def assemble_system(points, target, model: VariogramModel) -> KrigingSystem:
    """Build the ordinary-kriging system for known points and one target.

    ``points`` is a sequence of PixelSample (or (N, 3) array-like of
    row, col, value); ``target`` a (row, col) pair. Duplicate positions
    are rejected: they make the system singular.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be (row, col, value) triples")
    n = pts.shape[0]
    if n < 1:
        raise ValueError("need at least one known point")
    positions = pts[:, :2]
    if np.unique(positions, axis=0).shape[0] != n:
        raise ValueError("duplicate point positions make the system singular")
    tr, tc = float(target[0]), float(target[1])

    dists = np.hypot(
        positions[:, 0, np.newaxis] - positions[np.newaxis, :, 0],
        positions[:, 1, np.newaxis] - positions[np.newaxis, :, 1],
    )
    matrix = build_matrix(model_gamma(model, dists))
    target_d = np.hypot(positions[:, 0] - tr, positions[:, 1] - tc)
    rhs = np.append(model_gamma(model, target_d), 1.0)
    return KrigingSystem(
        matrix=matrix,
        rhs=rhs,
        positions=positions,
        values=pts[:, 2].copy(),
        target=(tr, tc),
        sill=model.sill,
    )


def build_matrix(gamma_block: np.ndarray) -> np.ndarray:
    """Border an N x N semivariance block with ones and a zero corner."""
    n = gamma_block.shape[0]
    matrix = np.ones((n + 1, n + 1))
    matrix[:n, :n] = gamma_block
    matrix[n, n] = 0.0
    return matrix


def _lu_solve_checked(matrix: np.ndarray, rhs: np.ndarray):
    """LU solve with partial pivoting; None when a pivot falls below PIVOT_TOL."""
    with warnings.catch_warnings():
        # a zero pivot is exactly the condition the ladder detects below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=False)
    if np.abs(np.diag(lu)).min() < PIVOT_TOL:
        return None
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def _solve_bordered(matrix, rhs, sill, target_dists):
    """Solve ladder: pivoted LU, jittered retry, inverse-distance fallback.

    Returns (weights, lagrange, degraded). The fallback guarantees a
    result whose weights still sum to one.
    """
    n = matrix.shape[0] - 1
    x = _lu_solve_checked(matrix, rhs)
    if x is None:
        jittered = matrix.copy()
        block = jittered[:n, :n]
        block += JITTER * sill * (1.0 - np.eye(n))
        x = _lu_solve_checked(jittered, rhs)
    if x is None:
        return _idw_weights(target_dists), 0.0, True
    return x[:n], float(x[n]), False


def _idw_weights(dists: np.ndarray) -> np.ndarray:
    """Normalized inverse-square-distance weights; exact hit takes all."""
    zero = dists == 0.0
    if zero.any():
        w = np.zeros_like(dists)
        w[np.argmax(zero)] = 1.0
        return w
    w = 1.0 / dists**2
    return w / w.sum()


def solve_weights(system: KrigingSystem) -> KrigingSolution:
    """Solve an assembled system for the BLUE weights.

    Never raises for solvable geometry: near-singular systems first get a
    jittered retry, then fall back to inverse-distance weighting with the
    solution flagged as degraded.
    """
    n = system.size
    target_d = np.hypot(
        system.positions[:, 0] - system.target[0],
        system.positions[:, 1] - system.target[1],
    )
    weights, lagrange, degraded = _solve_bordered(
        system.matrix, system.rhs, system.sill, target_d
    )
    return KrigingSolution(
        weights=weights,
        lagrange=lagrange,
        target_gammas=system.rhs[:n].copy(),
        degraded=degraded,
    )


def predict(solution: KrigingSolution, values) -> tuple[float, float]:
    """Weighted estimate and estimation variance for a solved system.

    Returns (predicted, variance); the prediction is the raw weighted sum
    (unclamped), the variance is sum(w * gamma_to_target) + lagrange with
    round-off negatives clamped to zero.
    """
    vals = np.asarray(values, dtype=float)
    if vals.shape != solution.weights.shape:
        raise ValueError(
            f"got {vals.shape[0] if vals.ndim else 0} values for "
            f"{solution.weights.shape[0]} weights"
        )
    predicted = float(solution.weights @ vals)
    variance = float(solution.weights @ solution.target_gammas + solution.lagrange)
    return predicted, max(variance, 0.0)
