"""Empirical variogram estimation and parametric model fitting.

The semivariance gamma(h) is half the mean squared difference between
sample values separated by distance h. The empirical estimator bins all
unordered sample pairs by Euclidean separation:

    gamma(bin) = sum((v_i - v_j)^2) / (2 * n_pairs_in_bin)

A parametric model (spherical by default) is then fitted so the kriging
solver can evaluate gamma at arbitrary distances. Models follow the
exact-interpolator convention gamma(0) = 0: a positive nugget applies
only at h > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FAMILIES",
    "SILL_FLOOR",
    "EmpiricalVariogram",
    "VariogramModel",
    "empirical_variogram",
    "fit_model",
    "model_gamma",
]

FAMILIES = ("spherical", "exponential", "linear")

# Sill floor substituted when all empirical semivariances are zero
# (constant field); keeps the kriging matrix nonsingular.
SILL_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class EmpiricalVariogram:
    """Binned empirical semivariogram.

    lags, gammas and counts are parallel arrays: strictly increasing bin
    centers, the semivariance per bin, and the number of contributing
    pairs (>= 1; empty bins are dropped).
    """

    lags: np.ndarray
    gammas: np.ndarray
    counts: np.ndarray
    max_lag: float

    def __post_init__(self) -> None:
        lags = np.asarray(self.lags, dtype=float)
        gammas = np.asarray(self.gammas, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if not (lags.shape == gammas.shape == counts.shape) or lags.ndim != 1:
            raise ValueError("lags, gammas and counts must be 1-D and parallel")
        if lags.size == 0:
            raise ValueError("variogram must have at least one bin")
        if np.any(np.diff(lags) <= 0):
            raise ValueError("lag centers must be strictly increasing")
        if np.any(gammas < 0):
            raise ValueError("semivariance must be >= 0")
        if np.any(counts < 1):
            raise ValueError("retained bins must hold at least one pair")
        for name, arr in (("lags", lags), ("gammas", gammas), ("counts", counts)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def bins(self) -> list[tuple[float, float, int]]:
        """(lag_center, gamma, pair_count) triples, ready for CSV dumps."""
        return [
            (float(l), float(g), int(n))
            for l, g, n in zip(self.lags, self.gammas, self.counts)
        ]


@dataclass(frozen=True)
class VariogramModel:
    """Parametric semivariogram: family plus nugget / sill / range.

    gamma(0) = 0 exactly for every family so kriging reproduces known
    values; the nugget is the jump at h -> 0+. The spherical family
    reaches the sill exactly at h = range and stays there.
    """

    family: str
    nugget: float
    sill: float
    range: float

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if not math.isfinite(self.nugget) or self.nugget < 0:
            raise ValueError(f"nugget must be finite and >= 0, got {self.nugget}")
        if not math.isfinite(self.sill) or self.sill < self.nugget:
            raise ValueError(f"sill must be finite and >= nugget, got {self.sill}")
        if not math.isfinite(self.range) or self.range <= 0:
            raise ValueError(f"range must be finite and > 0, got {self.range}")

    @property
    def partial_sill(self) -> float:
        return self.sill - self.nugget


def model_gamma(model: VariogramModel, h):
    """Evaluate the model semivariance at distance(s) h (scalar or array).

    gamma(0) = 0 exactly; negative distances are rejected.
    """
    arr = np.asarray(h, dtype=float)
    if np.any(arr < 0):
        raise ValueError("distance must be >= 0")
    p = model.partial_sill
    u = arr / model.range
    if model.family == "spherical":
        shape = np.where(u < 1.0, 1.5 * u - 0.5 * u**3, 1.0)
    elif model.family == "exponential":
        # practical-range convention: ~95% of the sill at h = range
        shape = 1.0 - np.exp(-3.0 * u)
    else:  # linear, bounded at the sill
        shape = np.minimum(u, 1.0)
    out = np.where(arr == 0.0, 0.0, model.nugget + p * shape)
    if np.isscalar(h) or arr.ndim == 0:
        return float(out)
    return out


def empirical_variogram(samples, max_lag: float, bin_width: float = 1.0) -> EmpiricalVariogram:
    """Estimate the empirical semivariogram from known samples.

    ``samples`` is a sequence of PixelSample (or any (N, 3) array-like of
    row, col, value). Unordered pairs with Euclidean separation d in
    (0, max_lag] are assigned to the bin with center round(d / bin_width)
    * bin_width, i.e. bin j covers [(j - 0.5) w, (j + 0.5) w). Zero-distance
    pairs carry no spatial lag and are skipped; empty bins are dropped.

    Raises ValueError for fewer than two samples or when no pair falls
    within max_lag.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("samples must be (row, col, value) triples")
    n = pts.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if max_lag <= 0:
        raise ValueError(f"max_lag must be > 0, got {max_lag}")
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")

    i, j = np.triu_indices(n, k=1)
    d = np.hypot(pts[i, 0] - pts[j, 0], pts[i, 1] - pts[j, 1])
    sq = (pts[i, 2] - pts[j, 2]) ** 2
    keep = (d > 0.0) & (d <= max_lag)
    if not keep.any():
        raise ValueError(f"no sample pair within max_lag={max_lag}")
    idx = np.floor(d[keep] / bin_width + 0.5).astype(np.int64)
    counts = np.bincount(idx)
    sums = np.bincount(idx, weights=sq[keep])
    nonzero = np.nonzero(counts)[0]
    return EmpiricalVariogram(
        lags=nonzero * bin_width,
        gammas=sums[nonzero] / (2.0 * counts[nonzero]),
        counts=counts[nonzero],
        max_lag=float(max_lag),
    )


def _spherical_shape(u: np.ndarray) -> np.ndarray:
    return np.where(u < 1.0, 1.5 * u - 0.5 * u**3, 1.0)


def _wls_nugget_psill(shape, gammas, weights):
    """Weighted LS for gamma ~ nugget + psill * shape with both params >= 0.

    ``shape`` may be (B,) or (R, B); returns (nugget, psill, rss) with
    matching leading shape.
    """
    s = np.atleast_2d(shape)
    w = weights[np.newaxis, :]
    g = gammas[np.newaxis, :]
    sw = w.sum()
    sws = (w * s).sum(axis=1)
    swss = (w * s * s).sum(axis=1)
    swg = (w * g).sum()
    swsg = (w * s * g).sum(axis=1)
    det = sw * swss - sws**2
    safe = det > 1e-12 * max(sw, 1.0) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        n = np.where(safe, (swss * swg - sws * swsg) / det, 0.0)
        p = np.where(safe, (sw * swsg - sws * swg) / det, swg / sw)
        # clamp to the feasible quadrant, refitting the free parameter
        neg_n = n < 0
        p = np.where(neg_n, np.where(swss > 0, swsg / swss, 0.0), p)
        n = np.where(neg_n, 0.0, n)
        neg_p = p < 0
        n = np.where(neg_p, swg / sw, n)
        p = np.where(neg_p, 0.0, p)
        n = np.maximum(n, 0.0)
    rss = (w * (n[:, np.newaxis] + p[:, np.newaxis] * s - g) ** 2).sum(axis=1)
    if np.ndim(shape) == 1:
        return float(n[0]), float(p[0]), float(rss[0])
    return n, p, rss


def _fit_spherical(emp: EmpiricalVariogram) -> VariogramModel:
    lags = emp.lags
    gammas = emp.gammas
    weights = emp.counts.astype(float)
    lo = max(lags[0] * 0.25, emp.max_lag * 1e-3)
    hi = emp.max_lag * 1.5
    grid = np.linspace(lo, hi, 160)
    _, _, rss = _wls_nugget_psill(_spherical_shape(lags[np.newaxis, :] / grid[:, np.newaxis]), gammas, weights)
    best = int(np.argmin(rss))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid.size - 1)]

    def objective(r: float) -> float:
        return _wls_nugget_psill(_spherical_shape(lags / r), gammas, weights)[2]

    r = _golden_min(objective, a, b)
    nugget, psill, _ = _wls_nugget_psill(_spherical_shape(lags / r), gammas, weights)
    sill = nugget + psill
    if sill <= 0.0:
        return VariogramModel("spherical", 0.0, SILL_FLOOR, emp.max_lag)
    return VariogramModel("spherical", nugget, sill, float(r))


def _golden_min(f, a: float, b: float, iters: int = 80) -> float:
    """Deterministic golden-section minimizer on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _fit_linear(emp: EmpiricalVariogram) -> VariogramModel:
    lags = emp.lags
    gammas = emp.gammas
    weights = emp.counts.astype(float)
    reach = max(emp.max_lag, float(lags[-1]))
    if lags.size == 1:
        nugget = 0.0
        slope = float(gammas[0] / lags[0])
    else:
        # weighted least squares line, clamped to nugget >= 0 and slope >= 0
        sw = weights.sum()
        sx = (weights * lags).sum()
        sxx = (weights * lags * lags).sum()
        sy = (weights * gammas).sum()
        sxy = (weights * lags * gammas).sum()
        det = sw * sxx - sx * sx
        nugget = (sxx * sy - sx * sxy) / det
        slope = (sw * sxy - sx * sy) / det
        if nugget < 0:
            nugget = 0.0
            slope = sxy / sxx
        if slope < 0:
            slope = 0.0
            nugget = sy / sw
    sill = nugget + slope * reach
    if sill <= 0.0:
        return VariogramModel("spherical", 0.0, SILL_FLOOR, emp.max_lag)
    return VariogramModel("linear", float(nugget), float(sill), float(reach))


def fit_model(empirical: EmpiricalVariogram) -> VariogramModel:
    """Fit a parametric model to an empirical variogram.

    Spherical family via pair-count-weighted least squares when three or
    more bins exist; a linear model when fewer; a flat floor model for a
    constant field (all gammas zero). Every input yields a usable model.
    """
    if np.all(empirical.gammas == 0.0):
        return VariogramModel("spherical", 0.0, SILL_FLOOR, empirical.max_lag)
    if empirical.lags.size < 3:
        return _fit_linear(empirical)
    return _fit_spherical(empirical)
