import math

import numpy as np
import pytest

import oracles
from skcv.core import ComputationError, GeoDataset, InputError
from skcv.cv import (
    DeadZoneSpec,
    FoldPlan,
    ModelConfig,
    dead_zone_filter,
    leave_one_out,
    load_fold_file,
    make_folds,
    resolve_plan,
    run_skcv,
    run_skcv_rlo,
    run_sloo,
    sweep,
)
from skcv.spatial_index import SpatialIndex

from conftest import make_ds


def line_ds(m=41):
    xs = np.arange(m, dtype=float)
    coords = np.c_[xs * 1.0, np.zeros(m)]
    return GeoDataset(coords, np.c_[xs], xs.copy())


def test_folds_partition_and_determinism():
    plan = make_folds(103, 10, seed=4)
    assert len(plan) == 10
    sizes = sorted(f.size for f in plan.folds)
    assert sizes[0] >= 10 and sizes[-1] <= 11
    plan.validate(103)
    again = make_folds(103, 10, seed=4)
    assert all(np.array_equal(a, b) for a, b in zip(plan.folds, again.folds))
    other = make_folds(103, 10, seed=5)
    assert not all(np.array_equal(a, b) for a, b in zip(plan.folds, other.folds))


def test_fold_count_bounds():
    with pytest.raises(InputError):
        make_folds(10, 1, 0)
    with pytest.raises(InputError):
        make_folds(10, 11, 0)
    assert make_folds(10, 10, 0).construction == "leave_one_out"


def test_bad_plan_rejected():
    with pytest.raises(InputError):
        FoldPlan((np.array([0, 1]), np.array([1, 2]))).validate(3)
    with pytest.raises(InputError):
        FoldPlan((np.array([0]), np.array([], dtype=int)))


def test_fold_file(tmp_path):
    ds = make_ds(6)
    p = tmp_path / "folds.txt"
    p.write_text("0, 1, 2\n# comment\n3 4 5\n")
    plan = load_fold_file(p, ds)
    assert [f.tolist() for f in plan.folds] == [[0, 1, 2], [3, 4, 5]]
    assert resolve_plan(ds, str(p), 0).construction == "user_supplied"
    p.write_text("0 1\n3 4 5\n")
    with pytest.raises(InputError, match="partition"):
        load_fold_file(p, ds)


def test_dead_zone_line_example():
    ds = line_ds()
    idx = SpatialIndex(ds.coords)
    training, removed = dead_zone_filter(ds, idx, [20], 15.0)
    assert removed.tolist() == list(range(5, 20)) + list(range(21, 36))
    assert 10 in removed and 30 in removed
    assert training.tolist() == list(range(0, 5)) + list(range(36, 41))
    # the boundary is inclusive
    _, removed0 = dead_zone_filter(ds, idx, [20], 1.0)
    assert removed0.tolist() == [19, 21]
    _, none = dead_zone_filter(ds, idx, [20], 0.0)
    assert none.size == 0


@pytest.mark.parametrize("seed", range(25))
def test_dead_zone_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    ds = make_ds(int(rng.integers(5, 60)), seed=seed, grid=2.0 if seed % 2 else None)
    idx = SpatialIndex(ds.coords)
    fold = rng.choice(len(ds), int(rng.integers(1, len(ds))), replace=False)
    r = float(rng.choice([0.0, 4.0, rng.uniform(0, 40)]))
    training, removed = dead_zone_filter(ds, idx, fold, r)
    want_train, want_removed = oracles.dead_zone(ds.coords, fold, r)
    assert training.tolist() == want_train
    assert removed.tolist() == want_removed


def test_r0_equals_reference_cv():
    ds = make_ds(90, seed=2)
    plan = make_folds(ds, 7, seed=3)
    got = run_skcv(ds, plan, 0.0, ModelConfig(k=5)).yhat
    want = oracles.standard_cv(ds.features, ds.response, plan.folds, 5)
    np.testing.assert_array_equal(got, want)


def test_invariants_across_radii():
    ds = make_ds(150, seed=9)
    plan = make_folds(ds, 6, seed=1)
    cfg = ModelConfig(k=3)
    prev = None
    for r in (0.0, 2.0, 5.0, 9.0, 14.0):
        sk = run_skcv(ds, plan, r, cfg, seed=2)
        rl = run_skcv_rlo(ds, plan, r, cfg, seed=2)
        for a, b in zip(sk.outcomes, rl.outcomes):
            assert a.removed_ids.size == b.removed_ids.size  # count parity
            assert not np.intersect1d(b.removed_ids, b.test_ids).size
            if a.skipped is None:
                assert a.min_gap > r
        if prev is not None:
            for (a, b), (pa, pb) in zip(zip(sk.outcomes, rl.outcomes), prev):
                assert np.isin(pa.removed_ids, a.removed_ids).all()  # monotone in r
                assert np.isin(pb.removed_ids, b.removed_ids).all()  # RLO nested too
        prev = list(zip(sk.outcomes, rl.outcomes))


def test_threads_do_not_change_results():
    ds = make_ds(200, seed=4)
    plan = make_folds(ds, 12, seed=0)
    for runner in (run_skcv, run_skcv_rlo):
        a = runner(ds, plan, 6.0, seed=3).yhat
        b = runner(ds, plan, 6.0, seed=3, threads=4).yhat
        np.testing.assert_array_equal(a, b)


def test_rlo_depends_on_seed_only():
    ds = make_ds(120, seed=4)
    plan = make_folds(ds, 5, seed=0)
    a = run_skcv_rlo(ds, plan, 8.0, seed=1)
    b = run_skcv_rlo(ds, plan, 8.0, seed=1)
    c = run_skcv_rlo(ds, plan, 8.0, seed=2)
    np.testing.assert_array_equal(a.yhat, b.yhat)
    assert any(not np.array_equal(x.removed_ids, y.removed_ids)
               for x, y in zip(a.outcomes, c.outcomes))


def test_sloo_paths_agree():
    ds = make_ds(70, seed=6, grid=1.0)
    for r in (0.0, 3.0, 10.0):
        a = run_skcv(ds, leave_one_out(ds), r).yhat
        b = run_sloo(ds, r)
        np.testing.assert_array_equal(a, b)


def test_classification_runs_and_scores():
    ds = make_ds(80, seed=8, classes=3)
    cfg = ModelConfig(k=5, task="classification")
    res = run_skcv(ds, make_folds(ds, 5, 0), 2.0, cfg)
    assert set(np.unique(res.yhat)) <= {0.0, 1.0, 2.0}
    assert 0.0 <= res.score(ds, "accuracy") <= 1.0


def test_skipped_folds_and_strict():
    ds = line_ds()
    plan = make_folds(ds, 2, seed=0)
    with pytest.raises(ComputationError, match="exhausts"):
        run_skcv(ds, plan, 100.0)
    res = run_skcv(ds, FoldPlan((np.array([0]), np.arange(1, 41))), 30.0, ModelConfig(k=9))
    assert res.skipped_folds == 1  # the big fold leaves only record 0 for training
    assert np.isnan(res.yhat[1:]).all() and not math.isnan(res.yhat[0])
    with pytest.raises(ComputationError, match="fold 1"):
        run_skcv(ds, FoldPlan((np.array([0]), np.arange(1, 41))), 30.0, strict=True)
    with pytest.raises(InputError):
        run_skcv(ds, plan, -1.0)


def test_sweep_curve_shape_and_nan_points():
    ds = make_ds(60, seed=1)
    curves = sweep(ds, (0, 5, 500), (1.0, 0.5), folds=3, model_cfg=ModelConfig(k=3), seed=0)
    assert [c.density_fraction for c in curves] == [1.0, 0.5]
    full = curves[0]
    assert full.radii.tolist() == [0.0, 5.0, 500.0]
    assert math.isnan(full.values[-1]) and full.points[-1].skipped_folds == 3
    assert full.points[0].mean_removed == 0.0
    assert any("all 3 folds skipped" in s for s in full.skip_log)
    with pytest.raises(ComputationError):
        sweep(ds, (0, 500), folds=3, model_cfg=ModelConfig(k=3), strict=True)


def test_radius_spec_validation():
    for bad in ((), (5, 2), (-1,), (math.inf,)):
        with pytest.raises(InputError):
            DeadZoneSpec(bad)
