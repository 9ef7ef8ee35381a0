"""Command-line front end.

Every command writes into ``--out`` a ``manifest.json`` recording the fully
resolved configuration, then its CSV/JSON results. ``skcv rerun DIR --out
NEW`` replays a manifest; the result files come out byte-identical.

Settings can also come from a flat ``key = value`` file given with
``--config``; keys are the long flag names (``-`` or ``_`` both accepted)
and flags given on the command line win.

Exit codes: 0 success, 1 computation error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .core import CATEGORICAL, ColumnSchema, ComputationError, InputError, load_csv, write_csv
from .cv import RLO, SKCV, DeadZoneSpec, ModelConfig, sweep
from .diagnostics import LagGrid, fit_sill_range, morans_i, semivariogram
from .planner import Rect, hex_lattice, invert_curve, pairwise_bias_variance
from .reporting import (
    CURVE_HEADER,
    DIAG_HEADER,
    PAIRS_HEADER,
    Manifest,
    load_manifest,
    read_curve,
    sha256_file,
    write_json,
    write_table,
)
from .synth import FieldSpec, generate_field

log = logging.getLogger("skcv")

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(t) for t in text)
    try:
        return tuple(float(t) for t in str(text).replace(",", " ").split())
    except ValueError:
        raise InputError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# option name -> (type converter, default); None default means "required or derived"
COMMON = {
    "seed": (int, 0),
    "threads": (int, 1),
}
DATA = {
    "data": (str, None),
    "schema": (str, None),
    "east": (str, None),
    "north": (str, None),
    "response": (str, None),
    "features": (str, None),
    "response_kind": (str, None),
}
MODEL = {
    "k": (int, 9),
    "task": (str, None),
    "standardize": (str, "fold"),
}
OPTIONS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "synth": {
        **COMMON,
        "n_points": (int, 1000),
        "model": (str, "exponential"),
        "sill": (float, 1.0),
        "range": (float, 50.0),
        "nugget": (float, 0.0),
        "n_features": (int, 12),
        "feature_noise": (float, 3.0),
        "area": (str, "0,0,1000,1000"),
        "task": (str, "regression"),
        "n_classes": (int, 3),
    },
    "diagnose": {
        **COMMON, **DATA,
        "lags": (str, None),
        "lag_step": (float, None),
        "lag_count": (int, 20),
        "tolerance": (float, None),
    },
    "skcv": {
        **COMMON, **DATA, **MODEL,
        "radii": (str, None),
        "densities": (str, "1.0"),
        "folds": (str, "10"),
        "metric": (str, None),
        "strict": (_bool, False),
    },
    "plan": {
        **COMMON, **DATA,
        "area": (str, None),
        "radius": (float, None),
        "curve": (str, None),
        "target": (float, None),
        "metric": (str, "rmse"),
    },
    "pairs": {
        **COMMON, **DATA, **MODEL,
        "area": (str, None),
        "grid": (int, 3),
        "radii": (str, None),
        "densities": (str, "1.0"),
        "folds": (str, "loo"),
    },
}
OPTIONS["rlo"] = OPTIONS["skcv"]

HELP = {
    "seed": "64-bit seed for every random choice",
    "threads": "worker threads for fold evaluation (results do not depend on it)",
    "data": "input CSV (header row, '.' decimals)",
    "schema": "key = value file naming the columns: east, north, response, features, response_kind",
    "east": "easting column (default 'east')",
    "north": "northing column (default 'north')",
    "response": "response column (default 'response')",
    "features": "comma-separated feature columns (default: all other columns)",
    "response_kind": "continuous or categorical",
    "k": "neighbours in kNN",
    "task": "regression or classification (default from response kind)",
    "standardize": "z-score scope: fold (training fold only), global, or none",
    "radii": "comma-separated dead-zone radii in meters",
    "densities": "comma-separated density fractions in (0, 1]",
    "folds": "fold count, 'loo', or a fold file (one fold of ids per line)",
    "metric": "rmse or accuracy",
    "strict": "abort when any fold is skipped",
    "lags": "explicit comma-separated lag centres",
    "lag_step": "lag spacing for a regular grid (default: max distance / 2 / lag-count)",
    "lag_count": "number of lags on a regular grid",
    "tolerance": "lag tolerance t; bins are [m - t, m + t] (default: half the step)",
    "area": "rectangle 'xmin,ymin,xmax,ymax' (default: data bounding box)",
    "radius": "covering radius of the hexagonal plan",
    "curve": "curve CSV to invert for a target metric level",
    "target": "required metric level when inverting --curve",
    "grid": "g for the g x g partition",
}


def read_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such config file: {path}")
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve(command: str, flags: dict[str, Any]) -> dict[str, Any]:
    """Merge defaults, config file and flags (in increasing priority)."""
    spec = OPTIONS[command]
    from_file = read_config_file(flags["config"]) if flags.get("config") else {}
    unknown = set(from_file) - set(spec)
    if unknown:
        raise InputError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    cfg = {}
    for name, (conv, default) in spec.items():
        value = flags.get(name)
        if value is None:
            value = from_file.get(name)
        try:
            cfg[name] = default if value is None else conv(value)
        except ValueError:
            raise InputError(f"bad value for {name}: {value!r}") from None
    if "data" in spec and cfg["data"]:
        cfg["data"] = str(Path(cfg["data"]).resolve())
    return cfg


def _schema(cfg: dict) -> ColumnSchema:
    fields: dict[str, Any] = {}
    if cfg.get("schema"):
        fields.update(read_config_file(cfg["schema"]))
    for key in ("east", "north", "response", "features", "response_kind"):
        if cfg.get(key):
            fields[key] = cfg[key]
    return ColumnSchema.from_mapping(fields)


def _dataset(cfg: dict):
    if not cfg.get("data"):
        raise InputError("--data is required")
    return load_csv(cfg["data"], _schema(cfg))


def _model(cfg: dict, ds) -> ModelConfig:
    task = cfg.get("task") or ("classification" if ds.response_kind == CATEGORICAL else "regression")
    return ModelConfig(k=cfg["k"], task=task, standardize=cfg["standardize"])


def run_synth(cfg: dict, out: Path) -> tuple[list[Path], list[str]]:
    spec = FieldSpec(
        area=Rect.parse(cfg["area"]), n_points=cfg["n_points"], model=cfg["model"],
        sill=cfg["sill"], range=cfg["range"], nugget=cfg["nugget"],
        n_features=cfg["n_features"], feature_noise=cfg["feature_noise"], seed=cfg["seed"],
        task=cfg["task"], n_classes=cfg["n_classes"],
    )
    ds = generate_field(spec)
    data = out / "data.csv"
    write_csv(ds, data)
    side = write_json(out / "data.json", {"field_spec": spec.to_dict(),
                                          "response_kind": ds.response_kind})
    return [data, side], []


def run_diagnose(cfg: dict, out: Path):
    ds = _dataset(cfg)
    if cfg.get("lags"):
        centers = _floats(cfg["lags"])
        step = min(np.diff(centers)) if len(centers) > 1 else centers[0] * 2
        lags = LagGrid(centers, cfg["tolerance"] or step / 2)
    else:
        step = cfg["lag_step"]
        if step is None:
            x0, y0, x1, y1 = ds.bounds()
            step = math.hypot(x1 - x0, y1 - y0) / 2 / cfg["lag_count"]
        lags = LagGrid.regular(step, cfg["lag_count"], cfg["tolerance"])
    vario = semivariogram(ds, lags)
    moran = morans_i(ds, lags)
    rows = [(c, g, int(n), i) for c, g, n, i in
            zip(vario.lag_centers, vario.gamma, vario.pair_count, moran.moran_i)]
    table = write_table(out / "diagnostics.csv", DIAG_HEADER, rows)
    summary = {"sill": vario.sill, "tolerance": lags.tolerance, "n_records": len(ds)}
    try:
        sill, rng = fit_sill_range(vario)
        summary["effective_range"] = None if math.isinf(rng) else rng
        summary["range_reached"] = not math.isinf(rng)
    except ComputationError as exc:
        summary["effective_range"] = None
        summary["range_reached"] = False
        summary["note"] = str(exc)
    js = write_json(out / "summary.json", summary)
    return [table, js], []


def _curve_name(mode: str, frac: float) -> str:
    return f"curve_{mode}_d{frac:g}.csv"


def _run_curves(cfg: dict, out: Path, mode: str):
    ds = _dataset(cfg)
    if not cfg.get("radii"):
        raise InputError("--radii is required")
    model = _model(cfg, ds)
    folds: Any = cfg["folds"]
    curves = sweep(ds, DeadZoneSpec(_floats(cfg["radii"])), _floats(cfg["densities"]), mode,
                   folds, model, cfg["seed"], threads=cfg["threads"], strict=cfg["strict"],
                   metric=cfg.get("metric"))
    paths, skips = [], []
    for c in curves:
        rows = [(p.r_delta, p.metric, p.mean_removed, p.skipped_folds) for p in c.points]
        paths.append(write_table(out / _curve_name(mode, c.density_fraction), CURVE_HEADER, rows))
        skips.extend(c.skip_log)
    if all(math.isnan(p.metric) for c in curves for p in c.points):
        raise ComputationError("dead zone exhausts data at every radius")
    return paths, skips


def run_skcv_cmd(cfg, out):
    return _run_curves(cfg, out, SKCV)


def run_rlo_cmd(cfg, out):
    return _run_curves(cfg, out, RLO)


def run_plan(cfg: dict, out: Path):
    if cfg.get("area"):
        area = Rect.parse(cfg["area"])
    elif cfg.get("data"):
        area = Rect.bounding(_dataset(cfg))
    else:
        raise InputError("plan needs --area or --data")
    meta: dict[str, Any] = {"area": list(area.as_tuple())}
    if cfg.get("curve"):
        if cfg.get("target") is None:
            raise InputError("--curve needs --target")
        radii, values = read_curve(cfg["curve"])
        radius = invert_curve(radii, values, cfg["target"],
                              higher_is_better=cfg["metric"] == "accuracy")
        meta.update(target=cfg["target"], metric=cfg["metric"], recommended_r_delta=radius)
    elif cfg.get("radius") is not None:
        radius = cfg["radius"]
    else:
        raise InputError("plan needs --radius or --curve with --target")
    if radius <= 0:
        raise ComputationError(f"recommended radius {radius:g} is not positive; no plan possible")
    plan = hex_lattice(area, radius)
    sites = write_table(out / "sites.csv", ("x", "y"), plan.sites.tolist())
    meta.update(covering_radius=plan.covering_radius, lattice_spacing=plan.lattice_spacing,
                n_sites=len(plan))
    js = write_json(out / "plan.json", meta)
    return [sites, js], []


def run_pairs(cfg: dict, out: Path):
    ds = _dataset(cfg)
    if not cfg.get("radii"):
        raise InputError("--radii is required")
    area = Rect.parse(cfg["area"]) if cfg.get("area") else Rect.bounding(ds)
    summaries = pairwise_bias_variance(
        ds, area, cfg["grid"], _floats(cfg["radii"]), _floats(cfg["densities"]),
        _model(cfg, ds), cfg["seed"], cfg["folds"], cfg["threads"])
    paths, skips = [], []
    for s in summaries:
        rows = [(r, m, sd, int(n)) for r, m, sd, n in
                zip(s.radii, s.mean_diff, s.std_diff, s.pair_count)]
        paths.append(write_table(out / f"pairs_d{s.density_fraction:g}.csv", PAIRS_HEADER, rows))
        skips.extend(s.skip_log)
    return paths, skips


RUNNERS = {
    "synth": run_synth,
    "diagnose": run_diagnose,
    "skcv": run_skcv_cmd,
    "rlo": run_rlo_cmd,
    "plan": run_plan,
    "pairs": run_pairs,
}

DESCRIPTIONS = {
    "synth": "generate a synthetic Gaussian random field dataset",
    "diagnose": "semivariogram and Moran's I correlogram of the response",
    "skcv": "dead-zone cross validation curve over radii and densities",
    "rlo": "random-leave-out control curve (same removal counts, random records)",
    "plan": "hexagonal sampling plan for a radius or for a target metric level",
    "pairs": "area-pair bias/variance of CV estimates against sample-generalize",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skcv", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"skcv {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log skipped folds and progress")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name, help=DESCRIPTIONS[name], description=DESCRIPTIONS[name])
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--config", help="key = value file with defaults for these flags")
        for key in opts:
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                           help=HELP.get(key, key.replace("_", " ")))
    rr = sub.add_parser("rerun", help="replay a run from its manifest")
    rr.add_argument("manifest", help="manifest.json or the directory holding it")
    rr.add_argument("--out", required=True, help="output directory for the replay")
    return parser


def execute(command: str, cfg: dict, out: Path) -> int:
    if cfg.get("data") and not Path(cfg["data"]).is_file():
        raise InputError(f"no such dataset: {cfg['data']}")
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out, command, cfg, cfg.get("data"))
    try:
        paths, skips = RUNNERS[command](cfg, out)
    except Exception:
        manifest.finish([], status="failed")
        raise
    manifest.finish(paths, skips)
    for line in skips:
        log.info(line)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "rerun":
            doc = load_manifest(args.manifest)
            command, cfg = doc["command"], dict(doc["config"])
            if cfg.get("data") and doc.get("dataset_sha256"):
                if not Path(cfg["data"]).is_file():
                    raise InputError(f"dataset {cfg['data']} from the manifest is missing")
                if sha256_file(cfg["data"]) != doc["dataset_sha256"]:
                    raise InputError(f"dataset {cfg['data']} changed since the manifest was written")
        else:
            command = args.command
            flags = {k: v for k, v in vars(args).items() if k not in ("command", "out", "verbose")}
            cfg = resolve(command, flags)
        return execute(command, cfg, Path(args.out))
    except ComputationError as exc:
        print(f"skcv: error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (InputError, OSError, KeyError, ValueError) as exc:
        print(f"skcv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
