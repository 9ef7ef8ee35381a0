import math

import numpy as np
import pytest

import oracles
from skcv.core import ComputationError, GeoDataset, InputError
from skcv.diagnostics import LagGrid, VariogramEstimate, fit_sill_range, morans_i, semivariogram, variogram_from_pairs
from skcv.spatial_index import SpatialIndex

from conftest import make_ds


def _ds(coords, y):
    coords = np.asarray(coords, dtype=float)
    return GeoDataset(coords, np.zeros((len(coords), 0)), y)


def test_two_point_semivariogram():
    v = semivariogram(_ds([[0, 0], [10, 0]], [0.0, 2.0]), LagGrid((10.0,), 1.0))
    assert v.gamma.tolist() == [2.0]
    assert v.pair_count.tolist() == [1]
    assert v.sill == 1.0


def test_empty_bins_are_flagged():
    v = semivariogram(_ds([[0, 0], [10, 0]], [0.0, 2.0]), LagGrid((3.0, 10.0), 1.0))
    assert v.empty.tolist() == [True, False]
    assert math.isnan(v.gamma[0])
    with pytest.raises(ComputationError, match="empty"):
        semivariogram(_ds([[0, 0], [10, 0]], [0.0, 2.0]), LagGrid((50.0,), 1.0))


def test_moran_alternating_line():
    # neighbours always differ in sign: perfect negative autocorrelation
    xs = np.arange(10.0)
    y = np.where(np.arange(10) % 2 == 0, 1.0, -1.0)
    c = morans_i(_ds(np.c_[xs, np.zeros(10)], y), LagGrid((1.0,), 0.1))
    assert c.moran_i[0] == pytest.approx(-1.0, abs=1e-12)


def test_constant_response_rejected():
    with pytest.raises(ComputationError, match="constant response"):
        morans_i(_ds([[0, 0], [1, 0], [2, 0]], [3.0, 3.0, 3.0]), LagGrid((1.0,), 0.5))


@pytest.mark.parametrize("seed", range(5))
def test_against_brute_force(seed):
    ds = make_ds(70, seed=seed, grid=1.0 if seed % 2 else None)
    lags = LagGrid.regular(10.0, 6, tolerance=6.0)
    v = semivariogram(ds, lags)
    c = morans_i(ds, lags)
    lows, highs = lags.bounds()
    idx = SpatialIndex(ds.coords)
    pairs = [idx.pairs_in_band(lo, hi) for lo, hi in zip(lows, highs)]
    np.testing.assert_allclose(v.gamma, variogram_from_pairs(ds, pairs), rtol=1e-12)
    for b, (lo, hi) in enumerate(zip(lows, highs)):
        g, n = oracles.semivariogram(ds.coords, ds.response, lo, hi)
        assert v.pair_count[b] == n
        assert v.gamma[b] == pytest.approx(g, rel=1e-12)
        assert c.moran_i[b] == pytest.approx(oracles.morans_i(ds.coords, ds.response, lo, hi),
                                             rel=1e-10, abs=1e-12)


def test_scale_and_permutation_invariance():
    ds = make_ds(80, seed=3)
    lags = LagGrid.regular(8.0, 5)
    v, c = semivariogram(ds, lags), morans_i(ds, lags)
    scaled = GeoDataset(ds.coords, ds.features, ds.response * 3.0 + 7.0)
    v2, c2 = semivariogram(scaled, lags), morans_i(scaled, lags)
    np.testing.assert_allclose(v2.gamma, 9.0 * v.gamma, rtol=1e-12)
    np.testing.assert_allclose(c2.moran_i, c.moran_i, rtol=1e-9)
    perm = np.random.default_rng(0).permutation(80)
    shuffled = ds.take(perm)
    np.testing.assert_allclose(semivariogram(shuffled, lags).gamma, v.gamma, rtol=1e-12)
    np.testing.assert_allclose(morans_i(shuffled, lags).moran_i, c.moran_i, rtol=1e-9)


def test_sill_and_range():
    c = np.array([5.0, 15, 25, 35])
    v = VariogramEstimate(c, np.array([0.2, 0.5, 0.96, 1.0]), np.array([3, 3, 3, 3]), 1.0)
    assert fit_sill_range(v) == (1.0, 25.0)
    flat = VariogramEstimate(c, np.array([0.2, 0.3, 0.4, 0.5]), np.array([3, 3, 3, 3]), 1.0)
    assert fit_sill_range(flat)[1] == math.inf
    sparse = VariogramEstimate(c, np.array([0.2, np.nan, np.nan, 1.0]), np.array([3, 0, 0, 3]), 1.0)
    with pytest.raises(ComputationError, match="three"):
        fit_sill_range(sparse)


def test_lag_grid_validation():
    g = LagGrid.regular(10.0, 3)
    assert g.centers == (5.0, 15.0, 25.0) and g.tolerance == 5.0
    lows, highs = LagGrid((2.0,), 5.0).bounds()
    assert lows.tolist() == [0.0] and highs.tolist() == [7.0]
    with pytest.raises(InputError):
        LagGrid((), 1.0)
    with pytest.raises(InputError):
        LagGrid((2.0, 1.0), 1.0)
    with pytest.raises(InputError):
        LagGrid((1.0,), 0.0)
