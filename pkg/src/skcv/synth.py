"""Synthetic Gaussian random fields with a known covariance model."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import norm

from .core import CATEGORICAL, CONTINUOUS, STREAM_SYNTH, ComputationError, GeoDataset, InputError, rng_for
from .planner import Rect

EXPONENTIAL = "exponential"
GAUSSIAN = "gaussian_cov"
NUGGET_ONLY = "nugget_only"
MODELS = (EXPONENTIAL, GAUSSIAN, NUGGET_ONLY)

MAX_POINTS = 5000


@dataclass(frozen=True)
class FieldSpec:
    area: Rect = Rect(0.0, 0.0, 1000.0, 1000.0)
    n_points: int = 1000
    model: str = EXPONENTIAL
    sill: float = 1.0
    range: float = 50.0
    nugget: float = 0.0
    n_features: int = 12
    feature_noise: float = 3.0
    seed: int = 0
    task: str = "regression"
    n_classes: int = 3

    def __post_init__(self):
        if self.model not in MODELS:
            raise InputError(f"unknown covariance model {self.model!r}")
        if not self.sill > 0:
            raise InputError("sill must be > 0")
        if not self.range > 0:
            raise InputError("range must be > 0")
        if self.nugget < 0:
            raise InputError("nugget must be >= 0")
        if self.n_points < 2:
            raise InputError("n_points must be >= 2")
        if self.n_points > MAX_POINTS:
            raise InputError(f"n_points above {MAX_POINTS} is too large for dense factorization")
        if self.n_features < 0 or self.feature_noise < 0:
            raise InputError("n_features and feature_noise must be non-negative")
        if self.task not in ("regression", "classification"):
            raise InputError(f"unknown task {self.task!r}")
        if self.task == "classification" and self.n_classes < 2:
            raise InputError("classification needs n_classes >= 2")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["area"] = list(self.area.as_tuple())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FieldSpec":
        d = dict(d)
        if "area" in d and not isinstance(d["area"], Rect):
            d["area"] = Rect(*map(float, d["area"]))
        return cls(**d)


def covariance(spec: FieldSpec, h: np.ndarray) -> np.ndarray:
    """Covariance at separation ``h``, nugget included at ``h == 0``."""
    h = np.asarray(h, dtype=np.float64)
    if spec.model == EXPONENTIAL:
        c = spec.sill * np.exp(-h / spec.range)
    elif spec.model == GAUSSIAN:
        c = spec.sill * np.exp(-((h / spec.range) ** 2))
    else:
        c = np.where(h == 0.0, spec.sill, 0.0)
    return c + np.where(h == 0.0, spec.nugget, 0.0)


def theoretical_variogram(spec: FieldSpec, h: float) -> float:
    """Semivariance at lag ``h``. At ``h = 0`` this is the nugget (the limit from above)."""
    if h < 0:
        raise ValueError("lag must be non-negative")
    if h == 0:
        return spec.nugget
    if math.isinf(h):
        return spec.sill + spec.nugget
    if spec.model == EXPONENTIAL:
        s = spec.sill * (1.0 - math.exp(-h / spec.range))
    elif spec.model == GAUSSIAN:
        s = spec.sill * (1.0 - math.exp(-((h / spec.range) ** 2)))
    else:
        s = spec.sill
    return spec.nugget + s


def generate_field(spec: FieldSpec) -> GeoDataset:
    """Sample point locations uniformly, then one realization of the field.

    Each feature is the latent value plus its own noise field, drawn
    independently of the other features but with the same spatial covariance
    (scaled to standard deviation ``feature_noise``). Nearby points therefore
    look alike in feature space, the way remote-sensed covariates do; for the
    ``nugget_only`` model the noise is white.
    """
    rng = rng_for(spec.seed, STREAM_SYNTH)
    a = spec.area
    m = spec.n_points
    coords = np.column_stack([
        rng.uniform(a.xmin, a.xmax, m),
        rng.uniform(a.ymin, a.ymax, m),
    ])
    std_normal = rng.standard_normal(m)
    if spec.model == NUGGET_ONLY:
        latent = math.sqrt(spec.sill + spec.nugget) * std_normal
    else:
        cov = covariance(spec, cdist(coords, coords))
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ComputationError(
                "covariance matrix is not positive definite; add a small nugget (jitter), "
                "e.g. nugget=1e-6 * sill"
            ) from None
        latent = chol @ std_normal
    z = rng.standard_normal((m, spec.n_features))
    if spec.model == NUGGET_ONLY:
        noise = z
    else:
        noise = (chol @ z) / math.sqrt(spec.sill + spec.nugget)
    noise = noise * spec.feature_noise
    features = latent[:, None] + noise
    if spec.task == "classification":
        total_sd = math.sqrt(spec.sill + spec.nugget)
        cuts = norm.ppf(np.arange(1, spec.n_classes) / spec.n_classes) * total_sd
        response = np.searchsorted(cuts, latent).astype(np.float64)
        kind = CATEGORICAL
    else:
        response = latent
        kind = CONTINUOUS
    return GeoDataset(coords, features, response, response_kind=kind)
