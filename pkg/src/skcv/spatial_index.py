"""Geometric queries over record coordinates.

A ``cKDTree`` proposes candidates with a slightly inflated radius; the final
membership test always uses :func:`skcv.core.spatial_distance` arithmetic, so
results are exactly those of a brute-force scan.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .core import InputError, pairwise_distance

_SLACK = 1e-9


def _inflate(r: float) -> float:
    return r * (1.0 + _SLACK) + _SLACK


class SpatialIndex:
    def __init__(self, coords: np.ndarray):
        coords = np.ascontiguousarray(coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise InputError("coords must have shape (M, 2)")
        self.coords = coords
        self.coords.setflags(write=False)
        self._tree = cKDTree(coords)

    @classmethod
    def from_dataset(cls, ds) -> "SpatialIndex":
        return cls(ds.coords)

    def __len__(self) -> int:
        return self.coords.shape[0]

    def within_radius(self, center: Sequence[float], r: float) -> np.ndarray:
        """Sorted ids with distance to ``center`` at most ``r`` (inclusive)."""
        if r < 0:
            raise ValueError("radius must be non-negative")
        cand = np.asarray(self._tree.query_ball_point(center, _inflate(r)), dtype=np.int64)
        if cand.size == 0:
            return cand
        d = pairwise_distance(self.coords[cand], center)
        return np.sort(cand[d <= r])

    def k_nearest_coords(
        self, center: Sequence[float], k: int, exclude: Iterable[int] = ()
    ) -> list[int]:
        """``k`` ids nearest to ``center``, by distance then ascending id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        excluded = {int(e) for e in exclude}
        available = len(self) - sum(1 for e in excluded if 0 <= e < len(self))
        if available < k:
            raise ValueError(f"need {k} candidates but only {available} records are available")
        want = min(len(self), k + len(excluded))
        dist, _ = self._tree.query(center, k=want)
        reach = float(np.max(np.atleast_1d(dist)))
        # every point within the k-th candidate distance, so ties are all seen
        cand = np.asarray(self._tree.query_ball_point(center, _inflate(reach)), dtype=np.int64)
        if excluded:
            cand = cand[~np.isin(cand, list(excluded))]
        d = pairwise_distance(self.coords[cand], center)
        order = np.lexsort((cand, d))
        return [int(i) for i in cand[order[:k]]]

    def pairs_in_band(self, low: float, high: float) -> np.ndarray:
        """Unordered pairs ``(i, j)``, ``i < j``, with ``low <= distance <= high``.

        Returned as an ``(P, 2)`` array sorted lexicographically.
        """
        if not 0 <= low <= high:
            raise ValueError("need 0 <= low <= high")
        pairs = self._tree.query_pairs(_inflate(high), output_type="ndarray").astype(np.int64)
        if pairs.size == 0:
            return pairs.reshape(0, 2)
        pairs.sort(axis=1)
        a = self.coords[pairs[:, 0]]
        b = self.coords[pairs[:, 1]]
        dx = a[:, 0] - b[:, 0]
        dy = a[:, 1] - b[:, 1]
        d = np.sqrt(dx * dx + dy * dy)
        pairs = pairs[(d >= low) & (d <= high)]
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]

    def distance_to_set(self, ids: Sequence[int]) -> np.ndarray:
        """Distance from every record to its closest member of ``ids``."""
        ids = np.asarray(ids, dtype=np.int64)
        return kernels.min_dist_to_set(self.coords, self.coords[ids])


def build_index(ds) -> SpatialIndex:
    return SpatialIndex(ds.coords)
