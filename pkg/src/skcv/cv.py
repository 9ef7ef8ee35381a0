"""Spatial k-fold cross validation with a dead zone around the test fold.

For every fold, training records lying within ``r_delta`` of any test record
are dropped before the model is fitted. ``r_delta = 0`` is ordinary k-fold
CV; one record per fold is spatial leave-one-out. The random-leave-out
variant drops the same number of training records, chosen at random, to
separate the effect of a smaller training set from that of distance.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    STREAM_FOLDS,
    STREAM_RLO,
    ComputationError,
    GeoDataset,
    InputError,
    rng_for,
    subsample_density,
)
from .prediction import CLASSIFICATION, METRICS, REGRESSION, fit_knn, fit_standardizer, knn_fit_predict, transform
from .spatial_index import SpatialIndex

log = logging.getLogger(__name__)

RANDOM_K_FOLD = "random_k_fold"
LEAVE_ONE_OUT = "leave_one_out"
USER_SUPPLIED = "user_supplied"

SKCV = "skcv"
RLO = "rlo"


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[np.ndarray, ...]
    construction: str = RANDOM_K_FOLD
    seed: int | None = None

    def __post_init__(self):
        folds = tuple(np.sort(np.asarray(f, dtype=np.int64)) for f in self.folds)
        if not folds or any(f.size == 0 for f in folds):
            raise InputError("every fold must be non-empty")
        object.__setattr__(self, "folds", folds)

    def __len__(self) -> int:
        return len(self.folds)

    def validate(self, m: int) -> None:
        allids = np.concatenate(self.folds)
        if allids.size != m or not np.array_equal(np.sort(allids), np.arange(m)):
            raise InputError(f"fold plan does not partition ids 0..{m - 1} into disjoint folds")


def make_folds(ds: GeoDataset | int, k: int, seed: int) -> FoldPlan:
    """Shuffle ids with ``seed`` and deal them round-robin into ``k`` folds."""
    m = ds if isinstance(ds, int) else len(ds)
    if not 1 < k <= m:
        raise InputError(f"fold count must satisfy 1 < k <= {m}, got {k}")
    perm = rng_for(seed, STREAM_FOLDS).permutation(m)
    folds = tuple(perm[i::k] for i in range(k))
    return FoldPlan(folds, LEAVE_ONE_OUT if k == m else RANDOM_K_FOLD, seed)


def leave_one_out(ds: GeoDataset | int) -> FoldPlan:
    m = ds if isinstance(ds, int) else len(ds)
    return FoldPlan(tuple(np.array([i]) for i in range(m)), LEAVE_ONE_OUT, None)


def load_fold_file(path: str | Path, ds: GeoDataset) -> FoldPlan:
    """Read a fold file: one fold per line, ids separated by commas or spaces.

    Ids refer to ``ds.source_ids`` so a plan written for the full dataset
    still applies to a density subsample (folds emptied by it are dropped).
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such fold file: {path}")
    lookup = {int(s): i for i, s in enumerate(ds.source_ids)}
    folds = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            raw = [int(t) for t in line.replace(",", " ").split()]
        except ValueError:
            raise InputError(f"{path}:{lineno}: fold ids must be integers") from None
        fold = [lookup[r] for r in raw if r in lookup]
        if fold:
            folds.append(np.array(fold))
    plan = FoldPlan(tuple(folds), USER_SUPPLIED, None)
    plan.validate(len(ds))
    return plan


@dataclass(frozen=True)
class DeadZoneSpec:
    radii: tuple[float, ...]

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii:
            raise InputError("need at least one dead-zone radius")
        if any(not math.isfinite(r) or r < 0 for r in radii):
            raise InputError("dead-zone radii must be finite and non-negative")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise InputError("dead-zone radii must be strictly ascending")
        object.__setattr__(self, "radii", radii)

    def __iter__(self):
        return iter(self.radii)


@dataclass(frozen=True)
class ModelConfig:
    k: int = 9
    task: str = REGRESSION
    standardize: str = "fold"  # "fold" | "global" | "none"

    def __post_init__(self):
        if self.k < 1:
            raise InputError("k must be >= 1")
        if self.task not in (REGRESSION, CLASSIFICATION):
            raise InputError(f"unknown task {self.task!r}")
        if self.standardize not in ("fold", "global", "none"):
            raise InputError(f"unknown standardization scope {self.standardize!r}")

    @property
    def metric(self) -> str:
        return "rmse" if self.task == REGRESSION else "accuracy"


@dataclass
class FoldOutcome:
    fold_index: int
    test_ids: np.ndarray
    removed_ids: np.ndarray
    retained_training_size: int
    predictions: dict[int, float] = field(default_factory=dict)
    skipped: str | None = None
    min_gap: float = math.inf  # closest test-to-training distance

    def training_ids(self, m: int) -> np.ndarray:
        """Ids the model was (or would have been) trained on."""
        keep = np.ones(m, dtype=bool)
        keep[self.test_ids] = False
        keep[self.removed_ids] = False
        return np.flatnonzero(keep)


@dataclass
class CVResult:
    yhat: np.ndarray  # NaN where the fold was skipped
    outcomes: list[FoldOutcome]
    r_delta: float
    mode: str = SKCV

    @property
    def skipped_folds(self) -> int:
        return sum(o.skipped is not None for o in self.outcomes)

    @property
    def mean_removed(self) -> float:
        return float(np.mean([o.removed_ids.size for o in self.outcomes]))

    def predicted_mask(self) -> np.ndarray:
        return ~np.isnan(self.yhat)

    def score(self, ds: GeoDataset, metric: str) -> float:
        """Metric pooled over every prediction that was made."""
        mask = self.predicted_mask()
        if not mask.any():
            raise ComputationError("dead zone exhausts data: every fold was skipped")
        return METRICS[metric](self.yhat[mask], ds.response[mask])


def dead_zone_filter(
    ds: GeoDataset, idx: SpatialIndex, fold: Sequence[int], r_delta: float
) -> tuple[np.ndarray, np.ndarray]:
    """Split the non-test records into (retained training ids, removed ids).

    A record is removed when it lies at distance ``<= r_delta`` from at least
    one test record. Both arrays are sorted.
    """
    if r_delta < 0:
        raise ValueError("r_delta must be non-negative")
    fold = np.asarray(fold, dtype=np.int64)
    gaps = idx.distance_to_set(fold)
    return _split_by_gap(len(ds), fold, gaps, r_delta)


def _split_by_gap(m: int, fold: np.ndarray, gaps: np.ndarray, r_delta: float):
    candidate = np.ones(m, dtype=bool)
    candidate[fold] = False
    close = gaps <= r_delta
    removed = np.flatnonzero(candidate & close)
    training = np.flatnonzero(candidate & ~close)
    return training, removed


class _Engine:
    """Shared per-dataset state: index, per-fold distance gaps, global scaling."""

    def __init__(self, ds: GeoDataset, plan: FoldPlan, cfg: ModelConfig,
                 index: SpatialIndex | None = None):
        plan.validate(len(ds))
        self.ds = ds
        self.plan = plan
        self.cfg = cfg
        self.index = index or SpatialIndex(ds.coords)
        self._gaps: dict[int, np.ndarray] = {}
        if cfg.standardize == "global":
            self.global_params = fit_standardizer(ds.features)
            self.features = transform(self.global_params, ds.features)
        else:
            self.features = np.asarray(ds.features)

    def gaps(self, i: int) -> np.ndarray:
        g = self._gaps.get(i)
        if g is None:
            g = self.index.distance_to_set(self.plan.folds[i])
            if len(self.plan) <= 64:  # leave-one-out plans would hold M^2 floats
                self._gaps[i] = g
        return g

    def fold(self, i: int, r_delta: float, mode: str, seed: int) -> FoldOutcome:
        ds, cfg = self.ds, self.cfg
        fold = self.plan.folds[i]
        gaps = self.gaps(i)
        training, removed = _split_by_gap(len(ds), fold, gaps, r_delta)
        if mode == RLO:
            pool = np.delete(np.arange(len(ds)), fold)
            # one permutation per fold, so removals are nested across radii
            order = rng_for(seed, STREAM_RLO, i).permutation(pool.size)
            removed = np.sort(pool[order[: removed.size]])
            keep = np.ones(pool.size, dtype=bool)
            keep[order[: removed.size]] = False
            training = pool[keep]
        out = FoldOutcome(i, fold, removed, int(training.size))
        if training.size < cfg.k:
            out.skipped = f"retained training size {training.size} < k={cfg.k}"
            return out
        out.min_gap = float(gaps[training].min())
        if mode == SKCV and not out.min_gap > r_delta:
            raise ComputationError(  # cannot happen unless the filter is broken
                f"dead-zone violation in fold {i}: gap {out.min_gap!r} <= {r_delta!r}")
        pred = knn_fit_predict(self.features[training], ds.response[training],
                               self.features[fold], cfg.k, cfg.task, cfg.standardize == "fold")
        out.predictions = {int(t): float(p) for t, p in zip(fold, pred)}
        return out

    def run(self, r_delta: float, mode: str, seed: int, threads: int = 1,
            strict: bool = False) -> CVResult:
        if r_delta < 0:
            raise InputError("r_delta must be non-negative")
        n = len(self.plan)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(lambda i: self.fold(i, r_delta, mode, seed), range(n)))
        else:
            outcomes = [self.fold(i, r_delta, mode, seed) for i in range(n)]
        yhat = np.full(len(self.ds), np.nan)
        for o in outcomes:
            if o.skipped is not None:
                if strict:
                    raise ComputationError(f"fold {o.fold_index} skipped: {o.skipped}")
                log.warning("r_delta=%g fold %d skipped: %s", r_delta, o.fold_index, o.skipped)
                continue
            for t, p in o.predictions.items():
                yhat[t] = p
        if all(o.skipped is not None for o in outcomes):
            raise ComputationError(f"dead zone exhausts data at r_delta={r_delta:g}: every fold skipped")
        return CVResult(yhat, outcomes, float(r_delta), mode)


def run_skcv(
    ds: GeoDataset,
    plan: FoldPlan,
    r_delta: float,
    model_cfg: ModelConfig = ModelConfig(),
    seed: int = 0,
    *,
    threads: int = 1,
    strict: bool = False,
    index: SpatialIndex | None = None,
) -> CVResult:
    """Predict every record from a model trained outside its fold's dead zone."""
    return _Engine(ds, plan, model_cfg, index).run(r_delta, SKCV, seed, threads, strict)


def run_skcv_rlo(
    ds: GeoDataset,
    plan: FoldPlan,
    r_delta: float,
    model_cfg: ModelConfig = ModelConfig(),
    seed: int = 0,
    *,
    threads: int = 1,
    strict: bool = False,
    index: SpatialIndex | None = None,
) -> CVResult:
    """As :func:`run_skcv`, but the same number of training records is removed
    uniformly at random from everything outside the fold."""
    return _Engine(ds, plan, model_cfg, index).run(r_delta, RLO, seed, threads, strict)


def run_sloo(
    ds: GeoDataset,
    r_delta: float,
    model_cfg: ModelConfig = ModelConfig(),
    *,
    index: SpatialIndex | None = None,
) -> np.ndarray:
    """Spatial leave-one-out, computed record by record with radius queries.

    Records whose retained training set is smaller than ``k`` get NaN.
    """
    index = index or SpatialIndex(ds.coords)
    cfg = model_cfg
    m = len(ds)
    if cfg.standardize == "global":
        feats = transform(fit_standardizer(ds.features), ds.features)
    else:
        feats = np.asarray(ds.features)
    yhat = np.full(m, np.nan)
    for i in range(m):
        mask = np.ones(m, dtype=bool)
        mask[index.within_radius(ds.coords[i], r_delta)] = False
        mask[i] = False
        training = np.flatnonzero(mask)
        if training.size < cfg.k:
            continue
        model = fit_knn(feats[training], ds.response[training], cfg.k, cfg.task,
                        ids=training, standardize=cfg.standardize == "fold")
        yhat[i] = model.predict(feats[i:i + 1])[0]
    if np.all(np.isnan(yhat)):
        raise ComputationError(f"dead zone exhausts data at r_delta={r_delta:g}")
    return yhat


@dataclass(frozen=True)
class CurvePoint:
    r_delta: float
    metric: float  # NaN when every fold was skipped
    mean_removed: float
    skipped_folds: int


@dataclass
class EvaluationCurve:
    points: list[CurvePoint]
    metric_kind: str
    density_fraction: float
    mode: str = SKCV
    skip_log: list[str] = field(default_factory=list)

    @property
    def radii(self) -> np.ndarray:
        return np.array([p.r_delta for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.metric for p in self.points])


def sweep(
    ds: GeoDataset,
    radii: DeadZoneSpec | Sequence[float],
    densities: Sequence[float] = (1.0,),
    mode: str = SKCV,
    folds: int | str = 10,
    model_cfg: ModelConfig = ModelConfig(),
    seed: int = 0,
    *,
    threads: int = 1,
    strict: bool = False,
    metric: str | None = None,
) -> list[EvaluationCurve]:
    """One curve per density: subsample once, then evaluate every radius on it.

    ``folds`` is a fold count, ``"loo"``, or a path to a fold file.
    """
    if not isinstance(radii, DeadZoneSpec):
        radii = DeadZoneSpec(tuple(radii))
    if not densities:
        raise InputError("need at least one density")
    if mode not in (SKCV, RLO):
        raise InputError(f"unknown mode {mode!r}")
    metric = metric or model_cfg.metric
    if metric not in METRICS:
        raise InputError(f"unknown metric {metric!r}")
    curves = []
    for frac in densities:
        sub = subsample_density(ds, frac, seed)
        plan = resolve_plan(sub, folds, seed)
        engine = _Engine(sub, plan, model_cfg)
        curve = EvaluationCurve([], metric, float(frac), mode)
        for r in radii:
            try:
                res = engine.run(r, mode, seed, threads, strict)
            except ComputationError:
                if strict:
                    raise
                curve.points.append(CurvePoint(r, math.nan, _mean_removed(engine, r), len(plan)))
                curve.skip_log.append(f"density={frac:g} r_delta={r:g}: all {len(plan)} folds skipped")
                log.warning("density=%g r_delta=%g: every fold skipped", frac, r)
                continue
            for o in res.outcomes:
                if o.skipped is not None:
                    curve.skip_log.append(
                        f"density={frac:g} r_delta={r:g} fold={o.fold_index}: {o.skipped}")
            curve.points.append(CurvePoint(
                r, res.score(sub, metric), res.mean_removed, res.skipped_folds))
        curves.append(curve)
    return curves


def _mean_removed(engine: _Engine, r: float) -> float:
    m = len(engine.ds)
    return float(np.mean([
        _split_by_gap(m, f, engine.gaps(i), r)[1].size for i, f in enumerate(engine.plan.folds)
    ]))


def resolve_plan(ds: GeoDataset, folds: int | str, seed: int) -> FoldPlan:
    if isinstance(folds, str):
        if folds.lower() == "loo":
            return leave_one_out(ds)
        if folds.isdigit():
            return make_folds(ds, int(folds), seed)
        return load_fold_file(folds, ds)
    return make_folds(ds, int(folds), seed)
