"""Spatial k-fold cross validation toolkit.

Dead-zone cross validation (SKCV), its leave-one-out and random-leave-out
variants, spatial autocorrelation diagnostics, kNN predictors and hexagonal
sampling plans for point data with planar coordinates.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ColumnSchema,
    ComputationError,
    GeoDataset,
    InputError,
    PointRecord,
    SkcvError,
    load_csv,
    spatial_distance,
    subsample_density,
    write_csv,
)
from .cv import (  # noqa: E402
    DeadZoneSpec,
    EvaluationCurve,
    FoldPlan,
    ModelConfig,
    dead_zone_filter,
    leave_one_out,
    make_folds,
    run_skcv,
    run_skcv_rlo,
    run_sloo,
    sweep,
)
from .diagnostics import LagGrid, fit_sill_range, morans_i, semivariogram  # noqa: E402
from .planner import Rect, hex_lattice, pairwise_bias_variance, partition_grid, sample_generalize  # noqa: E402
from .spatial_index import SpatialIndex  # noqa: E402
from .synth import FieldSpec, generate_field, theoretical_variogram  # noqa: E402

__all__ = [
    "ColumnSchema", "ComputationError", "DeadZoneSpec", "EvaluationCurve", "FieldSpec",
    "FoldPlan", "GeoDataset", "InputError", "LagGrid", "ModelConfig", "PointRecord", "Rect",
    "SkcvError", "SpatialIndex", "dead_zone_filter", "fit_sill_range", "generate_field",
    "hex_lattice", "leave_one_out", "load_csv", "make_folds", "morans_i", "pairwise_bias_variance",
    "partition_grid", "run_skcv", "run_skcv_rlo", "run_sloo", "sample_generalize", "semivariogram",
    "spatial_distance", "subsample_density", "sweep", "theoretical_variogram", "write_csv",
]
