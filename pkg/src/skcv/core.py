"""Dataset model, CSV ingestion, spatial distance and seeded randomness."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np


class SkcvError(Exception):
    """Base class for toolkit errors."""


class InputError(SkcvError):
    """Bad input data, schema or configuration (CLI exit code 2)."""


class SchemaError(InputError):
    pass


class DataParseError(InputError):
    pass


class ComputationError(SkcvError):
    """A computation could not produce a result (CLI exit code 1)."""


CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

# stream namespaces for rng_for
STREAM_SUBSAMPLE = 1
STREAM_FOLDS = 2
STREAM_RLO = 3
STREAM_SYNTH = 4
STREAM_PAIRS = 5
STREAM_LATTICE = 6


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``.

    Streams depend only on the key tuple, never on call order, so work split
    across threads draws the same numbers as a sequential run.
    """
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.default_rng(np.random.SeedSequence([seed, *map(int, keys)]))


@dataclass(frozen=True)
class PointRecord:
    id: int
    coord: tuple[float, float]
    features: tuple[float, ...]
    response: float


@dataclass(frozen=True)
class ColumnSchema:
    east: str = "east"
    north: str = "north"
    response: str = "response"
    features: tuple[str, ...] | None = None  # None: every other column
    response_kind: str = CONTINUOUS

    @classmethod
    def from_mapping(cls, m: dict) -> "ColumnSchema":
        feats = m.get("features")
        if isinstance(feats, str):
            feats = tuple(f.strip() for f in feats.split(",") if f.strip())
        elif feats is not None:
            feats = tuple(feats)
        return cls(
            east=m.get("east", "east"),
            north=m.get("north", "north"),
            response=m.get("response", "response"),
            features=feats,
            response_kind=m.get("response_kind", CONTINUOUS),
        )


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GeoDataset:
    """Immutable table of points: coordinates, features and one response.

    Record ``i`` has id ``i``. ``source_ids`` keeps the ids the records had in
    the dataset they were drawn from (identity for freshly loaded data).
    """

    coords: np.ndarray
    features: np.ndarray
    response: np.ndarray
    feature_names: tuple[str, ...] = ()
    response_kind: str = CONTINUOUS
    crs_note: str = "planar meters"
    source_ids: np.ndarray | None = field(default=None)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        response = np.asarray(self.response, dtype=np.float64).reshape(-1)
        m = response.shape[0]
        features = np.asarray(self.features, dtype=np.float64)
        if features.size == 0:
            features = features.reshape(m, 0)
        if m < 1:
            raise InputError("dataset needs at least one record")
        if coords.shape != (m, 2):
            raise InputError(f"coords must have shape ({m}, 2), got {coords.shape}")
        if features.ndim != 2 or features.shape[0] != m:
            raise InputError(f"features must have {m} rows")
        for name, arr in (("coords", coords), ("features", features), ("response", response)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} contain non-finite values")
        if self.response_kind not in (CONTINUOUS, CATEGORICAL):
            raise InputError(f"unknown response kind {self.response_kind!r}")
        if self.response_kind == CATEGORICAL:
            if np.any(response < 0) or np.any(response != np.round(response)):
                raise InputError("categorical responses must be non-negative integers")
        names = tuple(self.feature_names) or tuple(f"f{i + 1}" for i in range(features.shape[1]))
        if len(names) != features.shape[1]:
            raise InputError("feature_names length does not match feature count")
        src = np.arange(m) if self.source_ids is None else np.asarray(self.source_ids, dtype=np.int64)
        if src.shape != (m,):
            raise InputError("source_ids length does not match record count")
        object.__setattr__(self, "coords", _readonly(coords))
        object.__setattr__(self, "features", _readonly(features))
        object.__setattr__(self, "response", _readonly(response))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "source_ids", _readonly(src))

    def __len__(self) -> int:
        return self.response.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(len(self))

    def record(self, i: int) -> PointRecord:
        return PointRecord(
            id=int(i),
            coord=(float(self.coords[i, 0]), float(self.coords[i, 1])),
            features=tuple(float(v) for v in self.features[i]),
            response=float(self.response[i]),
        )

    @property
    def records(self) -> list[PointRecord]:
        return [self.record(i) for i in range(len(self))]

    def __iter__(self) -> Iterator[PointRecord]:
        return (self.record(i) for i in range(len(self)))

    def take(self, ids: Sequence[int]) -> "GeoDataset":
        """New dataset of the given records, renumbered from 0 in the given order."""
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size == 0:
            raise InputError("cannot build an empty dataset")
        return GeoDataset(
            coords=self.coords[ids],
            features=self.features[ids],
            response=self.response[ids],
            feature_names=self.feature_names,
            response_kind=self.response_kind,
            crs_note=self.crs_note,
            source_ids=self.source_ids[ids],
        )

    def bounds(self) -> tuple[float, float, float, float]:
        lo = self.coords.min(axis=0)
        hi = self.coords.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def spatial_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Euclidean distance in the plane, meters."""
    dx = float(a[0]) - float(b[0])
    dy = float(a[1]) - float(b[1])
    return math.sqrt(dx * dx + dy * dy)


def pairwise_distance(coords: np.ndarray, center: Sequence[float]) -> np.ndarray:
    """Vectorised ``spatial_distance`` from every row of ``coords`` to ``center``.

    Uses the same operation order as the scalar version, so results agree exactly.
    """
    dx = coords[:, 0] - float(center[0])
    dy = coords[:, 1] - float(center[1])
    return np.sqrt(dx * dx + dy * dy)


def load_csv(path: str | Path, schema: ColumnSchema | None = None) -> GeoDataset:
    schema = schema or ColumnSchema()
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataParseError(f"{path}: empty file") from None
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    if not rows:
        raise DataParseError(f"{path}: no data rows")

    fixed = (schema.east, schema.north, schema.response)
    feat_cols = schema.features
    if feat_cols is None:
        feat_cols = tuple(h for h in header if h not in fixed)
    for col in (*fixed, *feat_cols):
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r}")
    pos = {h: i for i, h in enumerate(header)}

    def cell(r: int, row: list[str], col: str) -> float:
        j = pos[col]
        try:
            v = float(row[j])
        except (IndexError, ValueError):
            raise DataParseError(
                f"{path}: row {r}, column {col!r}: not a number: {row[j] if j < len(row) else ''!r}"
            ) from None
        if not math.isfinite(v):
            raise DataParseError(f"{path}: row {r}, column {col!r}: non-finite value {row[j]!r}")
        return v

    m = len(rows)
    coords = np.empty((m, 2))
    feats = np.empty((m, len(feat_cols)))
    resp = np.empty(m)
    for r, row in enumerate(rows):
        line = r + 2  # 1-based, after header
        coords[r, 0] = cell(line, row, schema.east)
        coords[r, 1] = cell(line, row, schema.north)
        resp[r] = cell(line, row, schema.response)
        for j, col in enumerate(feat_cols):
            feats[r, j] = cell(line, row, col)
    return GeoDataset(coords, feats, resp, feature_names=feat_cols, response_kind=schema.response_kind)


def write_csv(ds: GeoDataset, path: str | Path) -> None:
    """Write ``ds`` with columns east, north, response, then the features."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["east", "north", "response", *ds.feature_names])
        cat = ds.response_kind == CATEGORICAL
        for i in range(len(ds)):
            y = ds.response[i]
            w.writerow(
                [repr(float(ds.coords[i, 0])), repr(float(ds.coords[i, 1])),
                 str(int(y)) if cat else repr(float(y)),
                 *(repr(float(v)) for v in ds.features[i])]
            )


def subsample_density(ds: GeoDataset, fraction: float, seed: int) -> GeoDataset:
    """Uniform random subset of ``ceil(fraction * M)`` records.

    Selected records keep their relative order; ``source_ids`` maps back.
    """
    if not 0.0 < fraction <= 1.0:
        raise InputError(f"density fraction must be in (0, 1], got {fraction}")
    m = len(ds)
    size = math.ceil(fraction * m - 1e-9)  # 0.1 * 30 must give 3, not 4
    if size == m:
        return ds.take(np.arange(m))
    chosen = rng_for(seed, STREAM_SUBSAMPLE).choice(m, size=size, replace=False)
    return ds.take(np.sort(chosen))
