"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Arithmetic is ordered the same way as the compiled loops so that
``knn_query`` and ``min_dist_to_set`` agree bit for bit across backends.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 22  # max elements in a temporary distance block


def knn_query(train: np.ndarray, query: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    n_train, n_feat = train.shape
    if k < 1 or k > n_train:
        raise ValueError(f"k={k} outside [1, {n_train}]")
    if query.shape[1] != n_feat:
        raise ValueError("feature dimension mismatch")
    n_query = query.shape[0]
    idx = np.empty((n_query, k), dtype=np.int64)
    d2 = np.empty((n_query, k), dtype=np.float64)
    step = max(1, _CHUNK // max(n_train, 1))
    for start in range(0, n_query, step):
        q = query[start:start + step]
        acc = np.zeros((q.shape[0], n_train), dtype=np.float64)
        for f in range(n_feat):
            diff = q[:, f, None] - train[None, :, f]
            acc += diff * diff
        order = np.argsort(acc, axis=1, kind="stable")[:, :k]
        idx[start:start + step] = order
        d2[start:start + step] = np.take_along_axis(acc, order, axis=1)
    return idx, d2


def min_dist_to_set(coords: np.ndarray, targets: np.ndarray) -> np.ndarray:
    m = coords.shape[0]
    out = np.full(m, np.inf)
    if targets.shape[0] == 0:
        return out
    step = max(1, _CHUNK // m)
    for start in range(0, targets.shape[0], step):
        t = targets[start:start + step]
        dx = coords[:, 0, None] - t[None, :, 0]
        dy = coords[:, 1, None] - t[None, :, 1]
        np.minimum(out, np.sqrt(dx * dx + dy * dy).min(axis=1), out=out)
    return out


def lag_sums(coords: np.ndarray, z: np.ndarray, lows: np.ndarray, highs: np.ndarray):
    nb = lows.shape[0]
    counts = np.zeros(nb, dtype=np.int64)
    sq = np.zeros(nb, dtype=np.float64)
    cross = np.zeros(nb, dtype=np.float64)
    hi_max = highs.max() if nb else -np.inf
    m = coords.shape[0]
    for i in range(m - 1):
        dx = coords[i, 0] - coords[i + 1:, 0]
        dy = coords[i, 1] - coords[i + 1:, 1]
        d = np.sqrt(dx * dx + dy * dy)
        near = d <= hi_max
        if not near.any():
            continue
        d = d[near]
        zj = z[i + 1:][near]
        dz = z[i] - zj
        for b in range(nb):
            inside = (lows[b] <= d) & (d <= highs[b])
            if inside.any():
                counts[b] += int(inside.sum())
                sq[b] += float(np.sum(dz[inside] * dz[inside]))
                cross[b] += float(np.sum(z[i] * zj[inside]))
    return counts, sq, cross


def column_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # add.accumulate is strictly sequential, unlike sum's pairwise reduction
    n = x.shape[0]
    if n == 0:
        raise ValueError("need at least one row")
    mean = np.add.accumulate(x, axis=0)[-1] / n
    d = x - mean
    std = np.sqrt(np.add.accumulate(d * d, axis=0)[-1] / n)
    return mean, std


def _zscore(x: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    safe = np.where(std == 0.0, 1.0, std)
    return np.where(std == 0.0, 0.0, (x - mean) / safe)


def standardized_knn(train: np.ndarray, query: np.ndarray, k: int, standardize: bool):
    if query.shape[1] != train.shape[1]:
        raise ValueError("feature dimension mismatch")
    if not standardize:
        return (*knn_query(train, query, k), None, None)
    mean, std = column_stats(train)
    idx, d2 = knn_query(_zscore(train, mean, std), _zscore(query, mean, std), k)
    return idx, d2, mean, std
