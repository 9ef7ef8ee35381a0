"""The compiled and pure-Python kernels must agree bit for bit."""

import numpy as np
import pytest

from skcv import kernels

pytestmark = pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")


@pytest.mark.parametrize("seed", range(10))
def test_knn_query_identical(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(10, 300)), int(rng.integers(1, 6))
    train = rng.normal(size=(n, d))
    if seed % 2:
        train = np.round(train)  # force distance ties
    query = rng.normal(size=(20, d))
    k = int(rng.integers(1, min(n, 15) + 1))
    a = kernels.knn_query(train, query, k, backend="cython")
    b = kernels.knn_query(train, query, k, backend="python")
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_knn_ties_go_to_lower_row():
    train = np.array([[1.0], [-1.0], [1.0], [0.0]])
    for be in ("cython", "python"):
        idx, d2 = kernels.knn_query(train, np.array([[0.0]]), 3, backend=be)
        assert idx.tolist() == [[3, 0, 1]]
        assert d2.tolist() == [[0.0, 1.0, 1.0]]


@pytest.mark.parametrize("standardize", [True, False])
def test_standardized_knn_identical(standardize):
    rng = np.random.default_rng(4)
    train = rng.normal(size=(150, 4)) * [1, 10, 0.1, 0]
    query = rng.normal(size=(30, 4))
    a = kernels.standardized_knn(train, query, 7, standardize, backend="cython")
    b = kernels.standardized_knn(train, query, 7, standardize, backend="python")
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_column_stats_identical_and_zero_std():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(500, 3)) * [1.0, 1e8, 1.0] + [0, 5, 0]
    x[:, 2] = 3.25
    ma, sa = kernels.column_stats(x, backend="cython")
    mb, sb = kernels.column_stats(x, backend="python")
    np.testing.assert_array_equal(ma, mb)
    np.testing.assert_array_equal(sa, sb)
    assert sa[2] == 0.0 and ma[2] == 3.25
    acc = 0.0
    for v in x[:, 1]:
        acc += v
    assert ma[1] == acc / 500  # plain running sum in row order
    np.testing.assert_allclose(sa, x.std(axis=0), rtol=1e-12)


def test_min_dist_identical():
    rng = np.random.default_rng(2)
    pts = rng.uniform(0, 1000, (700, 2))
    tgt = pts[rng.choice(700, 40, replace=False)]
    a = kernels.min_dist_to_set(pts, tgt, backend="cython")
    b = kernels.min_dist_to_set(pts, tgt, backend="python")
    np.testing.assert_array_equal(a, b)


def test_lag_sums_agree():
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 100, (300, 2))
    z = rng.normal(size=300)
    lows = np.array([0.0, 5, 20, 50])
    highs = np.array([10.0, 25, 40, 90])
    a = kernels.lag_sums(pts, z, lows, highs, backend="cython")
    b = kernels.lag_sums(pts, z, lows, highs, backend="python")
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_allclose(a[1], b[1], rtol=1e-12)
    np.testing.assert_allclose(a[2], b[2], rtol=1e-10, atol=1e-9)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.knn_query(np.zeros((2, 1)), np.zeros((1, 1)), 1, backend="fortran")
