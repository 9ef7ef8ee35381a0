import math

import numpy as np
import pytest

from skcv.core import (
    CATEGORICAL,
    ColumnSchema,
    DataParseError,
    GeoDataset,
    InputError,
    SchemaError,
    load_csv,
    pairwise_distance,
    rng_for,
    spatial_distance,
    subsample_density,
    write_csv,
)

from conftest import make_ds


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_three_row_csv(tmp_path):
    p = _write(tmp_path, "e,n,y,f1\n0,0,1.5,2\n1,0,2.5,3\n0,1,3.5,4\n")
    ds = load_csv(p, ColumnSchema(east="e", north="n", response="y"))
    assert len(ds) == 3 and ds.n_features == 1
    assert ds.feature_names == ("f1",)
    assert ds.record(2).coord == (0.0, 1.0)
    assert ds.record(1).response == 2.5


def test_nan_cell_names_row_and_column(tmp_path):
    p = _write(tmp_path, "east,north,response,f1\n0,0,1,2\n1,1,2,nan\n")
    with pytest.raises(DataParseError, match=r"row 3, column 'f1'"):
        load_csv(p)


def test_non_numeric_cell(tmp_path):
    p = _write(tmp_path, "east,north,response,f1\n0,0,1,2\n1,x,2,3\n")
    with pytest.raises(DataParseError, match=r"row 3, column 'north'"):
        load_csv(p)


def test_missing_column(tmp_path):
    p = _write(tmp_path, "east,north,f1\n0,0,1\n")
    with pytest.raises(SchemaError, match="response"):
        load_csv(p)


@pytest.mark.parametrize("text", ["", "east,north,response\n"])
def test_empty_file(tmp_path, text):
    with pytest.raises(DataParseError):
        load_csv(_write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match="no such file"):
        load_csv(tmp_path / "nope.csv")


def test_shuffled_rows_same_multiset(tmp_path):
    ds = make_ds(40, seed=3)
    p = tmp_path / "a.csv"
    write_csv(ds, p)
    lines = p.read_text().splitlines()
    body = lines[1:]
    np.random.default_rng(0).shuffle(body)
    q = _write(tmp_path, "\n".join([lines[0], *body]) + "\n", "b.csv")
    a, b = load_csv(p), load_csv(q)

    def tuples(d):
        return sorted((r.coord, r.features, r.response) for r in d.records)

    assert tuples(a) == tuples(b)
    assert not np.array_equal(a.coords, b.coords)


def test_csv_round_trip_is_exact(tmp_path):
    ds = make_ds(25, seed=5, classes=3)
    p = tmp_path / "c.csv"
    write_csv(ds, p)
    back = load_csv(p, ColumnSchema(response_kind=CATEGORICAL))
    np.testing.assert_array_equal(back.coords, ds.coords)
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.response, ds.response)


@pytest.mark.parametrize("a,b,d", [((0, 0), (0, 0), 0.0), ((0, 0), (3, 4), 5.0), ((1, 2), (4, 6), 5.0)])
def test_spatial_distance(a, b, d):
    assert spatial_distance(a, b) == d
    assert spatial_distance(b, a) == d


def test_pairwise_distance_matches_scalar():
    rng = np.random.default_rng(2)
    pts = rng.uniform(-1e3, 1e3, (200, 2))
    c = rng.uniform(-1e3, 1e3, 2)
    vec = pairwise_distance(pts, c)
    assert all(vec[i] == spatial_distance(pts[i], c) for i in range(len(pts)))


def test_dataset_invariants():
    with pytest.raises(InputError):
        GeoDataset(np.zeros((0, 2)), np.zeros((0, 1)), np.zeros(0))
    with pytest.raises(InputError, match="non-finite"):
        GeoDataset([[0, np.inf]], [[1.0]], [1.0])
    with pytest.raises(InputError, match="non-negative integers"):
        GeoDataset([[0, 0]], [[1.0]], [1.5], response_kind=CATEGORICAL)
    ds = GeoDataset([[0, 0]], np.zeros((1, 0)), [1.0])
    assert ds.n_features == 0
    with pytest.raises(ValueError):
        ds.coords[0, 0] = 1.0


def test_subsample_counts_and_provenance():
    ds = make_ds(100)
    sub = subsample_density(ds, 0.25, seed=7)
    assert len(sub) == 25
    np.testing.assert_array_equal(sub.ids, np.arange(25))
    np.testing.assert_array_equal(sub.coords, ds.coords[sub.source_ids])
    again = subsample_density(ds, 0.25, seed=7)
    np.testing.assert_array_equal(again.source_ids, sub.source_ids)
    assert len(subsample_density(make_ds(30), 0.1, 0)) == 3


def test_subsample_full_and_errors():
    ds = make_ds(20)
    full = subsample_density(ds, 1.0, seed=1)
    np.testing.assert_array_equal(full.coords, ds.coords)
    for bad in (0.0, -0.5, 1.01):
        with pytest.raises(InputError):
            subsample_density(ds, bad, 0)


def test_rng_streams_are_keyed():
    a = rng_for(5, 1, 2).random(4)
    assert np.array_equal(a, rng_for(5, 1, 2).random(4))
    assert not np.array_equal(a, rng_for(5, 2, 1).random(4))
    with pytest.raises(ValueError):
        rng_for(-1)
    rng_for(2**64 - 1)
    assert math.isfinite(rng_for(0).random())
