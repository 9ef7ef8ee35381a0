from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from skcv.core import CATEGORICAL, CONTINUOUS, GeoDataset  # noqa: E402

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def make_ds(m: int, n: int = 3, seed: int = 0, side: float = 100.0, classes: int = 0,
            grid: float | None = None) -> GeoDataset:
    """Uniform random points with a smooth response plus noise.

    ``grid`` snaps coordinates to a lattice of that pitch so exact distance
    ties (and points sitting exactly on a radius) actually occur.
    """
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0, side, (m, 2))
    if grid:
        coords = np.round(coords / grid) * grid
    feats = rng.normal(size=(m, n))
    y = np.sin(coords[:, 0] / 15) + feats[:, 0] * 0.5 + rng.normal(scale=0.3, size=m)
    kind = CONTINUOUS
    if classes:
        y = np.digitize(y, np.quantile(y, np.linspace(0, 1, classes + 1)[1:-1])).astype(float)
        kind = CATEGORICAL
    return GeoDataset(coords, feats, y, tuple(f"f{i}" for i in range(n)), kind)


@pytest.fixture
def small_ds():
    return make_ds(60, seed=1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
