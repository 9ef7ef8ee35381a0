"""Hexagonal sampling plans and the sample-generalize comparison.

A triangular lattice with nearest-site spacing ``sqrt(3) * r`` has covering
radius ``r``: every point of the plane is within ``r`` of a site. Training
on such a sample and predicting the rest of an area is the realized
counterpart of a dead-zone CV estimate at the same radius.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .core import STREAM_LATTICE, STREAM_PAIRS, ComputationError, GeoDataset, InputError, rng_for

log = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Rect:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = [float(v) for v in self.as_tuple()]
        if not all(math.isfinite(v) for v in vals):
            raise InputError("rectangle corners must be finite")
        if not (vals[2] > vals[0] and vals[3] > vals[1]):
            raise InputError(f"rectangle needs positive width and height, got {tuple(vals)}")
        for name, v in zip(("xmin", "ymin", "xmax", "ymax"), vals):
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.xmin, self.ymin, self.xmax, self.ymax)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @classmethod
    def parse(cls, text: str) -> "Rect":
        parts = [p for p in text.replace(",", " ").split() if p]
        if len(parts) != 4:
            raise InputError(f"area must be 'xmin,ymin,xmax,ymax', got {text!r}")
        return cls(*map(float, parts))

    @classmethod
    def bounding(cls, ds: GeoDataset) -> "Rect":
        x0, y0, x1, y1 = ds.bounds()
        # degenerate extents (single row/column of points) get a 1 m margin
        if x1 <= x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        return cls(x0, y0, x1, y1)

    def distance_to(self, pts: np.ndarray) -> np.ndarray:
        dx = np.maximum(np.maximum(self.xmin - pts[:, 0], pts[:, 0] - self.xmax), 0.0)
        dy = np.maximum(np.maximum(self.ymin - pts[:, 1], pts[:, 1] - self.ymax), 0.0)
        return np.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True)
class SamplingPlan:
    sites: np.ndarray  # (S, 2)
    covering_radius: float
    lattice_spacing: float
    area: Rect

    def __len__(self) -> int:
        return self.sites.shape[0]


def hex_lattice(area: Rect, r_delta: float, origin: Sequence[float] | None = None) -> SamplingPlan:
    """Sites of a triangular lattice covering ``area`` with radius ``r_delta``.

    Rows are ``1.5 * r_delta`` apart and every other row is shifted by half a
    spacing. The lattice is laid out from ``origin`` (default: the area's min
    corner) over the area plus one ring, then sites farther than ``r_delta``
    from the area are dropped; those can never be the nearest site of an
    area point, so the covering guarantee is kept.
    """
    if not r_delta > 0:
        raise InputError("sampling radius must be > 0")
    a = SQRT3 * r_delta
    row = 1.5 * r_delta
    ox, oy = (area.xmin, area.ymin) if origin is None else (float(origin[0]), float(origin[1]))
    j0 = math.floor((area.ymin - oy) / row) - 1
    j1 = math.ceil((area.ymax - oy) / row) + 1
    i0 = math.floor((area.xmin - ox) / a) - 2
    i1 = math.ceil((area.xmax - ox) / a) + 1
    js = np.arange(j0, j1 + 1)
    is_ = np.arange(i0, i1 + 1)
    jj, ii = np.meshgrid(js, is_, indexing="ij")
    xs = ox + ii * a + np.where(jj % 2 == 1, a / 2, 0.0)
    ys = oy + jj * row
    sites = np.column_stack([xs.ravel(), ys.ravel()])
    sites = sites[area.distance_to(sites) <= r_delta]
    return SamplingPlan(sites, float(r_delta), a, area)


def max_gap(plan: SamplingPlan, pitch: float = 1.0) -> float:
    """Largest distance from a probe-grid point of the area to its nearest site."""
    area = plan.area
    xs = np.arange(area.xmin, area.xmax + pitch * 0.5, pitch)
    ys = np.arange(area.ymin, area.ymax + pitch * 0.5, pitch)
    xs = np.unique(np.clip(np.append(xs, area.xmax), area.xmin, area.xmax))
    ys = np.unique(np.clip(np.append(ys, area.ymax), area.ymin, area.ymax))
    tree = cKDTree(plan.sites)
    worst = 0.0
    for y in ys:  # row at a time keeps memory flat on large areas
        probe = np.column_stack([xs, np.full(xs.size, y)])
        _, nearest = tree.query(probe)
        s = plan.sites[nearest]
        dx = probe[:, 0] - s[:, 0]
        dy = probe[:, 1] - s[:, 1]
        worst = max(worst, float(np.sqrt(dx * dx + dy * dy).max()))
    return worst


def nearest_records(ds: GeoDataset, sites: np.ndarray) -> np.ndarray:
    """Sorted unique ids of the record nearest to each site (ties: lowest id)."""
    from .spatial_index import SpatialIndex

    idx = SpatialIndex(ds.coords)
    picked = {idx.k_nearest_coords(s, 1)[0] for s in sites}
    return np.array(sorted(picked), dtype=np.int64)


def sample_generalize(
    ds_b: GeoDataset,
    r_delta: float,
    model_cfg=None,
    seed: int = 0,
    area: Rect | None = None,
    jitter_origin: bool = False,
) -> float:
    """Train on the records nearest to a hexagonal plan over ``area`` and
    score the predictions for every other record.

    With ``jitter_origin`` the lattice origin is shifted by a seeded random
    offset inside one lattice cell.
    """
    from .cv import ModelConfig
    from .prediction import METRICS, fit_standardizer, knn_fit_predict, transform

    cfg = model_cfg or ModelConfig()
    area = area or Rect.bounding(ds_b)
    origin = None
    if jitter_origin:
        u = rng_for(seed, STREAM_LATTICE).random(2)
        origin = (area.xmin + u[0] * SQRT3 * r_delta, area.ymin + u[1] * 1.5 * r_delta)
    plan = hex_lattice(area, r_delta, origin)
    train = nearest_records(ds_b, plan.sites)
    test = np.setdiff1d(np.arange(len(ds_b)), train)
    if train.size < cfg.k:
        raise ComputationError(f"hexagonal sample holds {train.size} records, fewer than k={cfg.k}")
    if test.size == 0:
        raise ComputationError(
            f"sampling radius {r_delta:g} selects every record for training; nothing left to test")
    feats = np.asarray(ds_b.features)
    if cfg.standardize == "global":
        feats = transform(fit_standardizer(feats), feats)
    pred = knn_fit_predict(feats[train], ds_b.response[train], feats[test], cfg.k, cfg.task,
                           cfg.standardize == "fold")
    return METRICS[cfg.metric](pred, ds_b.response[test])


def partition_grid(area: Rect, g: int) -> list[Rect]:
    """``g * g`` equal cells, row-major from the min corner."""
    if g < 2:
        raise InputError("grid size must be >= 2")
    w = area.width / g
    h = area.height / g
    cells = []
    for j in range(g):
        for i in range(g):
            x0 = area.xmin + i * w
            y0 = area.ymin + j * h
            x1 = area.xmax if i == g - 1 else area.xmin + (i + 1) * w
            y1 = area.ymax if j == g - 1 else area.ymin + (j + 1) * h
            cells.append(Rect(x0, y0, x1, y1))
    return cells


def assign_cells(ds: GeoDataset, area: Rect, g: int) -> np.ndarray:
    """Cell index (row-major) for every record; -1 outside the area.

    A record on an internal boundary goes to the cell whose min corner it is
    nearest to, i.e. the upper/right cell.
    """
    cells = partition_grid(area, g)
    xb = np.array([c.xmin for c in cells[:g]])
    yb = np.array([cells[j * g].ymin for j in range(g)])
    x = ds.coords[:, 0]
    y = ds.coords[:, 1]
    ci = np.clip(np.searchsorted(xb, x, side="right") - 1, 0, g - 1)
    cj = np.clip(np.searchsorted(yb, y, side="right") - 1, 0, g - 1)
    inside = (x >= area.xmin) & (x <= area.xmax) & (y >= area.ymin) & (y <= area.ymax)
    return np.where(inside, cj * g + ci, -1)


@dataclass
class PairDifferenceSummary:
    density_fraction: float
    radii: np.ndarray
    mean_diff: np.ndarray
    std_diff: np.ndarray
    pair_count: np.ndarray
    differences: list[np.ndarray] = field(default_factory=list)  # per radius, over valid pairs
    skip_log: list[str] = field(default_factory=list)


def pairwise_bias_variance(
    ds: GeoDataset,
    area: Rect,
    g: int,
    radii: Sequence[float],
    densities: Sequence[float] = (1.0,),
    model_cfg=None,
    seed: int = 0,
    folds: int | str = "loo",
    threads: int = 1,
) -> list[PairDifferenceSummary]:
    """Dead-zone CV on cell A against sample-generalize on cell B, over all
    ordered pairs of distinct cells.

    Each cell's CV estimate and sample-generalize score is computed once per
    radius; the density applies to the CV side only. Positive differences of
    an error metric mean the CV estimate was the more pessimistic one.
    """
    from .cv import DeadZoneSpec, ModelConfig, SKCV, sweep

    cfg = model_cfg or ModelConfig()
    spec = DeadZoneSpec(tuple(radii))
    if spec.radii[0] <= 0:
        raise InputError("pair analysis needs positive radii (sample-generalize is undefined at 0)")
    cells = partition_grid(area, g)
    owner = assign_cells(ds, area, g)
    members = [np.flatnonzero(owner == c) for c in range(len(cells))]
    n_r = len(spec.radii)

    sg = np.full((len(cells), n_r), np.nan)
    sg_log = []
    for c, ids in enumerate(members):
        if ids.size == 0:
            sg_log.append(f"cell {c}: no records")
            continue
        sub = ds.take(ids)
        for ri, r in enumerate(spec.radii):
            try:
                sg[c, ri] = sample_generalize(sub, r, cfg, seed, area=cells[c])
            except ComputationError as exc:
                sg_log.append(f"cell {c} r_delta={r:g}: sample-generalize failed: {exc}")

    out = []
    for frac in densities:
        cv = np.full((len(cells), n_r), np.nan)
        log_lines = list(sg_log)
        for c, ids in enumerate(members):
            if ids.size < 2:
                log_lines.append(f"cell {c}: too few records for CV")
                continue
            try:
                curve = sweep(ds.take(ids), spec, (frac,), SKCV, folds, cfg,
                              _cell_seed(seed, c), threads=threads)[0]
            except (ComputationError, InputError) as exc:  # undersized cells
                log_lines.append(f"cell {c} density={frac:g}: CV failed: {exc}")
                continue
            cv[c] = curve.values
        diffs, means, stds, counts = [], [], [], []
        for ri, r in enumerate(spec.radii):
            d = []
            for a in range(len(cells)):
                for b in range(len(cells)):
                    if a == b:
                        continue
                    if math.isnan(cv[a, ri]) or math.isnan(sg[b, ri]):
                        log_lines.append(f"density={frac:g} r_delta={r:g} pair ({a},{b}) skipped")
                        continue
                    d.append(cv[a, ri] - sg[b, ri])
            d = np.array(d)
            diffs.append(d)
            counts.append(d.size)
            means.append(float(d.mean()) if d.size else math.nan)
            stds.append(float(d.std()) if d.size else math.nan)
        for line in log_lines:
            log.warning(line)
        if sum(counts) == 0:
            raise ComputationError("every area pair was skipped; cells are too small")
        out.append(PairDifferenceSummary(float(frac), np.asarray(spec.radii), np.array(means),
                                         np.array(stds), np.array(counts), diffs, log_lines))
    return out


def _cell_seed(seed: int, cell: int) -> int:
    return int(rng_for(seed, STREAM_PAIRS, cell).integers(0, 2**63))


def invert_curve(radii: Sequence[float], values: Sequence[float], target: float,
                 higher_is_better: bool = False) -> float:
    """Largest radius at which the piecewise-linear curve still meets ``target``.

    For error metrics "meets" means ``value <= target``; for scores such as
    accuracy, ``value >= target``.
    """
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = ~np.isnan(v)
    r, v = r[ok], v[ok]
    if r.size == 0:
        raise ComputationError("curve has no finite points")
    if higher_is_better:
        v, target = -v, -target
    best = -math.inf
    for i in range(r.size):
        if v[i] <= target:
            best = max(best, r[i])
        if i + 1 < r.size:
            lo, hi = v[i], v[i + 1]
            if (lo <= target < hi) or (hi <= target < lo):
                t = (target - lo) / (hi - lo)
                best = max(best, r[i] + t * (r[i + 1] - r[i]))
    if best == -math.inf:
        shown = -v if higher_is_better else v
        raise ComputationError(
            f"target {(-target if higher_is_better else target):g} is not reachable; "
            f"curve values span [{shown.min():g}, {shown.max():g}]")
    return float(best)
