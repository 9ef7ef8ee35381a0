"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``SKCV_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("SKCV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def _f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def knn_query(train, query, k: int, backend: str | None = None):
    """Indices and squared distances of the ``k`` nearest rows of ``train``
    for every row of ``query``, sorted by distance then row index."""
    impl = _pick(backend)
    train = _f64(train)
    query = _f64(query)
    if train.ndim != 2 or query.ndim != 2:
        raise ValueError("knn_query expects 2-D arrays")
    return impl.knn_query(train, query, int(k))


def column_stats(x, backend: str | None = None):
    """Per-column mean and population standard deviation."""
    x = _f64(x)
    if x.ndim == 1:
        x = x[:, None]
    return _pick(backend).column_stats(x)


def standardized_knn(train, query, k: int, standardize: bool = True, backend: str | None = None):
    """z-score with the training rows' statistics, then :func:`knn_query`.

    Returns ``(idx, d2, mean, std)``; ``mean`` and ``std`` are None when
    ``standardize`` is false.
    """
    return _pick(backend).standardized_knn(_f64(train), _f64(query), int(k), bool(standardize))


def min_dist_to_set(coords, targets, backend: str | None = None) -> np.ndarray:
    """Euclidean distance from each coordinate to the closest target (inf if none)."""
    impl = _pick(backend)
    return impl.min_dist_to_set(_f64(coords).reshape(-1, 2), _f64(targets).reshape(-1, 2))


def lag_sums(coords, z, lows, highs, backend: str | None = None):
    """Per-bin pair count, sum of squared differences and sum of products
    over unordered pairs whose distance lies in ``[low, high]``."""
    impl = _pick(backend)
    return impl.lag_sums(_f64(coords).reshape(-1, 2), _f64(z), _f64(lows), _f64(highs))


def _pick(backend: str | None):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        if BACKEND != "cython":
            raise RuntimeError("compiled kernels are not available")
        return _impl
    raise ValueError(f"unknown backend {backend!r}")
