"""Spatial autocorrelation of the response: semivariogram and Moran's I.

Both statistics are computed over the same distance bands: a lag centre ``m``
with tolerance ``t`` collects every unordered pair whose separation lies in
``[m - t, m + t]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import ComputationError, GeoDataset, InputError


@dataclass(frozen=True)
class LagGrid:
    centers: tuple[float, ...]
    tolerance: float

    def __post_init__(self):
        centers = tuple(float(c) for c in self.centers)
        if not centers:
            raise InputError("lag grid needs at least one centre")
        if not self.tolerance > 0:
            raise InputError("lag tolerance must be > 0")
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise InputError("lag centres must be strictly ascending")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "tolerance", float(self.tolerance))

    @classmethod
    def regular(cls, step: float, count: int, tolerance: float | None = None,
                start: float | None = None) -> "LagGrid":
        """``count`` centres ``start, start + step, ...``; defaults give
        touching bins of width ``step`` starting at zero distance."""
        start = step / 2 if start is None else start
        tol = step / 2 if tolerance is None else tolerance
        return cls(tuple(start + i * step for i in range(count)), tol)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.centers)
        return np.maximum(c - self.tolerance, 0.0), c + self.tolerance


@dataclass(frozen=True)
class VariogramEstimate:
    lag_centers: np.ndarray
    gamma: np.ndarray  # NaN in empty bins
    pair_count: np.ndarray
    sill: float

    @property
    def empty(self) -> np.ndarray:
        return self.pair_count == 0


@dataclass(frozen=True)
class CorrelogramEstimate:
    lag_centers: np.ndarray
    moran_i: np.ndarray  # NaN in empty bins
    pair_count: np.ndarray
    baseline: float = 0.0

    @property
    def empty(self) -> np.ndarray:
        return self.pair_count == 0


def _band_sums(ds: GeoDataset, lags: LagGrid):
    y = np.asarray(ds.response, dtype=np.float64)
    z = y - y.mean()
    lows, highs = lags.bounds()
    counts, sq, cross = kernels.lag_sums(ds.coords, z, lows, highs)
    return z, counts, sq, cross


def semivariogram(ds: GeoDataset, lags: LagGrid) -> VariogramEstimate:
    """Matheron estimator: half the mean squared difference per distance band.

    The sill is the sample (population) variance of the response.
    """
    if len(ds) < 2:
        raise ComputationError("a semivariogram needs at least two records")
    z, counts, sq, _ = _band_sums(ds, lags)
    if not counts.any():
        raise ComputationError("every lag bin is empty; widen the lag grid or tolerance")
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = np.where(counts > 0, sq / (2.0 * counts), np.nan)
    return VariogramEstimate(np.asarray(lags.centers), gamma, counts, float(np.mean(z * z)))


def morans_i(ds: GeoDataset, lags: LagGrid) -> CorrelogramEstimate:
    """Moran's I with binary band weights (both pair orders counted).

    ``I = (M / W) * sum_ij w_ij z_i z_j / sum_i z_i^2``; with symmetric 0/1
    weights that is ``M * S / (P * sum z^2)`` for ``P`` unordered pairs whose
    products sum to ``S``.
    """
    z, counts, _, cross = _band_sums(ds, lags)
    ss = float(np.dot(z, z))
    if ss == 0.0 or len(ds) < 2:
        raise ComputationError("constant response: Moran's I is undefined")
    m = len(ds)
    with np.errstate(invalid="ignore", divide="ignore"):
        moran = np.where(counts > 0, m * cross / (counts * ss), np.nan)
    return CorrelogramEstimate(np.asarray(lags.centers), moran, counts)


def fit_sill_range(v: VariogramEstimate) -> tuple[float, float]:
    """Sill and the first lag centre where the semivariogram reaches 95% of it.

    The range is ``inf`` if that level is never reached.
    """
    ok = ~v.empty
    if int(ok.sum()) < 3:
        raise ComputationError("need at least three non-empty lag bins to fit a range")
    target = 0.95 * v.sill
    for c, g in zip(v.lag_centers[ok], v.gamma[ok]):
        if g >= target:
            return v.sill, float(c)
    return v.sill, math.inf


def variogram_from_pairs(ds: GeoDataset, pairs: Sequence[np.ndarray]) -> np.ndarray:
    """Matheron value for explicit pair lists, one list per bin (NaN when empty).

    Slow reference path, useful for checking the kernel against
    :meth:`SpatialIndex.pairs_in_band`.
    """
    y = np.asarray(ds.response)
    out = []
    for p in pairs:
        p = np.asarray(p).reshape(-1, 2)
        if p.shape[0] == 0:
            out.append(math.nan)
            continue
        d = y[p[:, 0]] - y[p[:, 1]]
        out.append(float(np.sum(d * d) / (2 * p.shape[0])))
    return np.array(out)
