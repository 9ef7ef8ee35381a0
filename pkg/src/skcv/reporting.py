"""CSV/JSON emission and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__, kernels

CURVE_HEADER = ("r_delta", "metric", "mean_removed", "skipped_folds")
PAIRS_HEADER = ("r_delta", "mean_diff", "std_diff", "pair_count")
DIAG_HEADER = ("lag_center", "gamma", "pair_count", "moran_i")


def fmt(v) -> str:
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return Path(path)


def write_json(path: Path, obj) -> Path:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return Path(path)


def read_curve(path: str | Path) -> tuple[list[float], list[float]]:
    radii, values = [], []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            radii.append(float(row["r_delta"]))
            values.append(float(row["metric"]))
    return radii, values


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class Manifest:
    """``manifest.json`` in the output directory.

    Written before any result file and rewritten when the run finishes with
    output hashes and the skip log. Only the config is needed to re-run.
    """

    def __init__(self, out: Path, command: str, config: dict, data_path: str | None):
        self.out = Path(out)
        self.path = self.out / "manifest.json"
        self.doc = {
            "tool": "skcv",
            "version": __version__,
            "kernel_backend": kernels.BACKEND,
            "python": platform.python_version(),
            "command": command,
            "config": config,
            "dataset_sha256": sha256_file(data_path) if data_path else None,
            "started_at": _now(),
            "finished_at": None,
            "status": "running",
            "outputs": {},
            "skip_log": [],
        }
        write_json(self.path, self.doc)

    def finish(self, outputs: Sequence[Path], skip_log: Sequence[str] = (), status: str = "ok"):
        self.doc["outputs"] = {p.name: sha256_file(p) for p in outputs}
        self.doc["skip_log"] = list(skip_log)
        self.doc["finished_at"] = _now()
        self.doc["status"] = status
        write_json(self.path, self.doc)


def load_manifest(path: str | Path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    return json.loads(path.read_text(encoding="utf-8"))
