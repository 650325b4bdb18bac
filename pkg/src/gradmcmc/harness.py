"""Experiment orchestration: JSON configuration, CSV dataset ingestion, seeded
multi-repeat runs, CSV result tables, and plot-data emission.

Per-run seeds are derived additively from one base seed (seed + repeat index);
the RNG (numpy PCG64), the ESS estimator, and the kernel backend are recorded
in the experiment metadata so every output row can be rerun exactly. Per-run
failures are recorded in the run table's error column and excluded from
aggregates; the experiment continues.
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .adapt import GAD_KINDS, ChainConfig, run_adaptive_chain
from .baselines import BASELINE_KINDS, run_baseline_chain
from .diagnostics import ESS_ESTIMATOR
from .errors import ConfigError, DatasetError
from .targets import (
    ClassificationDataset,
    make_correlated_gaussian_2d,
    make_kernel_gaussian,
    make_logistic_regression,
    make_neal_gaussian,
    prepare_dataset,
    synthetic_classification_dataset,
)

SAMPLER_KINDS = GAD_KINDS + BASELINE_KINDS

RUN_CSV_HEADER = ("sampler,target,repeat,seed,time_s,accept_rate,"
                  "ess_min,ess_med,ess_max,min_ess_per_s,error")

# target kind -> (required params, optional params with defaults)
TARGET_SCHEMAS = {
    "neal_gaussian": (("dim",), {}),
    "correlated_gaussian": ((), {"correlation": 0.99}),
    "kernel_gaussian": ((), {"grid_points": 51, "low": 0.0, "high": 4.0}),
    "logistic_regression": (("dataset",), {"prior_variance": 100.0, "standardize": True}),
    "synthetic_logistic": ((), {"num_points": 500, "num_features": 10,
                                "prior_variance": 100.0, "data_seed": 0}),
}

SAMPLER_OPTION_DEFAULTS = {
    "eta": None,
    "alpha_star": None,
    "rho_beta": 0.02,
    "leapfrog_steps": 10,
    "initial_scale": None,
    "adapt_rate": 0.02,
}


@dataclass
class TargetSpec:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class SamplerSpec:
    kind: str
    label: str = ""
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.label:
            self.label = self.kind


@dataclass
class ExperimentConfig:
    target: TargetSpec
    samplers: list
    burn_in: int = 20000
    samples: int = 20000
    repeats: int = 10
    seed: int = 0
    output_dir: str = "results"
    jobs: int = 1
    trace_coordinate: int | None = None


def _check_keys(d, allowed, required, context):
    for key in d:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {context}")
    for key in required:
        if key not in d:
            raise ConfigError(f"missing required key {key!r} in {context}")


def _parse_target(raw) -> TargetSpec:
    if not isinstance(raw, dict):
        raise ConfigError("'target' must be an object with a 'kind' field")
    if "kind" not in raw:
        raise ConfigError("missing required key 'kind' in target")
    kind = raw["kind"]
    if kind not in TARGET_SCHEMAS:
        raise ConfigError(f"unknown target kind {kind!r}; expected one of {sorted(TARGET_SCHEMAS)}")
    required, optional = TARGET_SCHEMAS[kind]
    allowed = {"kind", *required, *optional}
    _check_keys(raw, allowed, required, f"target {kind!r}")
    params = dict(optional)
    params.update({k: v for k, v in raw.items() if k != "kind"})
    return TargetSpec(kind=kind, params=params)


def _parse_sampler(raw) -> SamplerSpec:
    if isinstance(raw, str):
        raw = {"kind": raw}
    if not isinstance(raw, dict):
        raise ConfigError("each sampler must be a kind string or object")
    if "kind" not in raw:
        raise ConfigError("missing required key 'kind' in sampler")
    kind = raw["kind"]
    if kind not in SAMPLER_KINDS:
        raise ConfigError(f"unknown sampler kind {kind!r}; expected one of {SAMPLER_KINDS}")
    allowed = {"kind", "label", *SAMPLER_OPTION_DEFAULTS}
    _check_keys(raw, allowed, ("kind",), f"sampler {kind!r}")
    options = {k: raw[k] for k in SAMPLER_OPTION_DEFAULTS if k in raw}
    return SamplerSpec(kind=kind, label=raw.get("label", kind), options=options)


def parse_config(data) -> ExperimentConfig:
    """Validate a raw JSON object into an ExperimentConfig; unknown keys are
    rejected by name."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    allowed = {"target", "samplers", "burn_in", "samples", "repeats", "seed",
               "output_dir", "jobs", "trace_coordinate"}
    _check_keys(data, allowed, ("target", "samplers"), "configuration")
    samplers_raw = data["samplers"]
    if not isinstance(samplers_raw, list) or not samplers_raw:
        raise ConfigError("'samplers' must be a non-empty list")
    cfg = ExperimentConfig(
        target=_parse_target(data["target"]),
        samplers=[_parse_sampler(s) for s in samplers_raw],
        burn_in=int(data.get("burn_in", 20000)),
        samples=int(data.get("samples", 20000)),
        repeats=int(data.get("repeats", 10)),
        seed=int(data.get("seed", 0)),
        output_dir=str(data.get("output_dir", "results")),
        jobs=int(data.get("jobs", 1)),
        trace_coordinate=(None if data.get("trace_coordinate") is None
                          else int(data["trace_coordinate"])),
    )
    if cfg.burn_in < 1 or cfg.samples < 1 or cfg.repeats < 1 or cfg.jobs < 1:
        raise ConfigError("burn_in, samples, repeats, and jobs must all be >= 1")
    labels = [s.label for s in cfg.samplers]
    if len(set(labels)) != len(labels):
        raise ConfigError("sampler labels must be unique (set 'label' to disambiguate)")
    if cfg.target.kind == "logistic_regression":
        path = Path(cfg.target.params["dataset"])
        if not path.exists():
            raise ConfigError(f"dataset file does not exist: {path}")
    return cfg


def load_config(path) -> ExperimentConfig:
    """Parse a JSON experiment configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}") from e
    return parse_config(data)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Canonical JSON-serialisable form; load_config(serialise(x)) == x."""
    return {
        "target": {"kind": cfg.target.kind, **cfg.target.params},
        "samplers": [
            {"kind": s.kind, "label": s.label, **s.options} for s in cfg.samplers
        ],
        "burn_in": cfg.burn_in,
        "samples": cfg.samples,
        "repeats": cfg.repeats,
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
        "jobs": cfg.jobs,
        "trace_coordinate": cfg.trace_coordinate,
    }


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(config_to_dict(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _sniff_header(first_row):
    for cell in first_row:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def read_numeric_csv(path):
    """Read a numeric CSV with an auto-detected optional header row.

    Returns (column_names, data matrix, first_data_rownum); ingestion errors
    carry 1-based file row numbers (counting the header).
    """
    with open(path, encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DatasetError(f"{path}: file contains no data")
    names = None
    start = 0
    if _sniff_header(rows[0]):
        names = [c.strip() for c in rows[0]]
        start = 1
    if start >= len(rows):
        raise DatasetError(f"{path}: header only, no data rows")
    width = len(rows[start])
    data = np.empty((len(rows) - start, width))
    for idx in range(start, len(rows)):
        row = rows[idx]
        rownum = idx + 1
        if len(row) != width:
            raise DatasetError(
                f"{path}: row {rownum} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                data[idx - start, j] = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: row {rownum} has non-numeric cell {cell!r}") from None
    if names is None:
        names = [f"col{j}" for j in range(width)]
    return names, data, start + 1


def load_csv_dataset(path, standardize=True) -> ClassificationDataset:
    """Ingest a classification CSV: last column is the binary {0,1} label, all
    other columns numeric features (standardised when requested, bias column
    appended)."""
    _, data, first_rownum = read_numeric_csv(path)
    if data.shape[1] < 2:
        raise DatasetError(f"{path}: need at least one feature column plus the label")
    labels = data[:, -1]
    bad = np.nonzero((labels != 0.0) & (labels != 1.0))[0]
    if bad.size:
        raise DatasetError(
            f"{path}: row {first_rownum + bad[0]} has non-binary label {labels[bad[0]]}")
    return prepare_dataset(data[:, :-1], labels, standardize=standardize)


def build_target(spec: TargetSpec):
    """Construct the TargetModel described by a TargetSpec."""
    p = spec.params
    if spec.kind == "neal_gaussian":
        return make_neal_gaussian(int(p["dim"]))
    if spec.kind == "correlated_gaussian":
        return make_correlated_gaussian_2d(float(p["correlation"]))
    if spec.kind == "kernel_gaussian":
        return make_kernel_gaussian(int(p["grid_points"]), float(p["low"]), float(p["high"]))
    if spec.kind == "logistic_regression":
        data = load_csv_dataset(p["dataset"], standardize=bool(p["standardize"]))
        return make_logistic_regression(data, prior_variance=float(p["prior_variance"]))
    if spec.kind == "synthetic_logistic":
        data = synthetic_classification_dataset(
            num_points=int(p["num_points"]), num_features=int(p["num_features"]),
            seed=int(p["data_seed"]))
        return make_logistic_regression(data, prior_variance=float(p["prior_variance"]))
    raise ConfigError(f"unknown target kind {spec.kind!r}")


def _chain_config(cfg: ExperimentConfig, spec: SamplerSpec) -> ChainConfig:
    opts = dict(SAMPLER_OPTION_DEFAULTS)
    opts.update(spec.options)
    return ChainConfig(
        burn_in=cfg.burn_in,
        samples=cfg.samples,
        eta=opts["eta"],
        alpha_star=opts["alpha_star"],
        rho_beta=opts["rho_beta"],
        initial_scale=opts["initial_scale"],
        adapt_rate=opts["adapt_rate"],
        leapfrog_steps=int(opts["leapfrog_steps"]),
    )


def _run_one(cfg: ExperimentConfig, spec: SamplerSpec, repeat: int):
    """Run one (sampler, repeat) job; returns (row dict, plot payload or None)."""
    seed = cfg.seed + repeat
    row = {"sampler": spec.label, "target": cfg.target.kind, "repeat": repeat,
           "seed": seed, "time_s": "", "accept_rate": "", "ess_min": "",
           "ess_med": "", "ess_max": "", "min_ess_per_s": "", "error": ""}
    try:
        target = build_target(cfg.target)
        chain_cfg = _chain_config(cfg, spec)
        if spec.kind in GAD_KINDS:
            trace, _, summary = run_adaptive_chain(target, spec.kind, chain_cfg, seed)
        else:
            trace, summary = run_baseline_chain(target, spec.kind, chain_cfg, seed)
    except Exception as e:  # recorded per spec; the experiment continues
        row["error"] = f"{type(e).__name__}: {e}"
        return row, None
    row.update(time_s=repr(trace.wall_time),
               accept_rate=repr(summary.accept_rate),
               ess_min=repr(summary.ess_min),
               ess_med=repr(summary.ess_med),
               ess_max=repr(summary.ess_max),
               min_ess_per_s=repr(summary.min_ess_per_sec))
    payload = None
    if repeat == 0:
        coord = cfg.trace_coordinate if cfg.trace_coordinate is not None else target.dim - 1
        if not -target.dim <= coord < target.dim:
            coord = target.dim - 1
        payload = {
            "coord": coord % target.dim,
            "coord_trace": trace.states[:, coord].copy(),
            "log_target": trace.log_target.copy(),
            "learned_diag": (np.diagonal(trace.learned_scale.entries).copy()
                             if trace.learned_scale is not None else None),
            "true_scales": (np.asarray(target.true_scales).copy()
                            if target.true_scales is not None else None),
        }
    return row, payload


def _run_one_packed(args):
    cfg_dict, sampler_raw, repeat = args
    cfg = parse_config(cfg_dict)
    return _run_one(cfg, _parse_sampler(sampler_raw), repeat)


@dataclass
class ExperimentResult:
    run_rows: list
    aggregate_rows: list
    output_dir: Path


def _write_plot_data(plots_dir: Path, label: str, target_kind: str, payload: dict):
    plots_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{label}_{target_kind}"
    coord = payload["coord"]
    with open(plots_dir / f"{stem}_coord{coord}_trace.dat", "w", encoding="utf-8") as fh:
        for i, v in enumerate(payload["coord_trace"]):
            fh.write(f"{i} {v!r}\n")
    with open(plots_dir / f"{stem}_logpi.dat", "w", encoding="utf-8") as fh:
        for i, v in enumerate(payload["log_target"]):
            fh.write(f"{i} {v!r}\n")
    if payload["learned_diag"] is not None:
        true = payload["true_scales"]
        with open(plots_dir / f"{stem}_scales.dat", "w", encoding="utf-8") as fh:
            for i, v in enumerate(payload["learned_diag"]):
                if true is not None:
                    fh.write(f"{i} {v!r} {true[i]!r}\n")
                else:
                    fh.write(f"{i} {v!r}\n")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every sampler x repeat job, write runs.csv / summary.csv /
    metadata.json / plot data under the configured output directory, and
    return the row tables."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(spec, repeat) for spec in cfg.samplers for repeat in range(cfg.repeats)]
    results = {}
    if cfg.jobs > 1:
        cfg_dict = config_to_dict(cfg)
        packed = [(cfg_dict, {"kind": spec.kind, "label": spec.label, **spec.options}, repeat)
                  for spec, repeat in jobs]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for (spec, repeat), outcome in zip(jobs, pool.map(_run_one_packed, packed)):
                results[(spec.label, repeat)] = outcome
    else:
        for spec, repeat in jobs:
            results[(spec.label, repeat)] = _run_one(cfg, spec, repeat)

    run_rows = []
    aggregate_rows = []
    for spec in cfg.samplers:
        ok_rows = []
        for repeat in range(cfg.repeats):
            row, payload = results[(spec.label, repeat)]
            run_rows.append(row)
            if not row["error"]:
                ok_rows.append(row)
            if payload is not None:
                _write_plot_data(out / "plots", spec.label, cfg.target.kind, payload)
        agg = {"sampler": spec.label, "target": cfg.target.kind,
               "repeats_completed": len(ok_rows)}
        if ok_rows:
            for col in ("time_s", "accept_rate", "ess_min", "ess_med", "ess_max",
                        "min_ess_per_s"):
                agg[col] = repr(float(np.mean([float(r[col]) for r in ok_rows])))
            agg["min_ess_per_s_std"] = repr(float(
                np.std([float(r["min_ess_per_s"]) for r in ok_rows], ddof=1)
                if len(ok_rows) > 1 else 0.0))
        else:
            for col in ("time_s", "accept_rate", "ess_min", "ess_med", "ess_max",
                        "min_ess_per_s", "min_ess_per_s_std"):
                agg[col] = ""
        aggregate_rows.append(agg)

    header = RUN_CSV_HEADER.split(",")
    with open(out / "runs.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(run_rows)
    agg_header = ["sampler", "target", "repeats_completed", "time_s", "accept_rate",
                  "ess_min", "ess_med", "ess_max", "min_ess_per_s", "min_ess_per_s_std"]
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=agg_header)
        writer.writeheader()
        writer.writerows(aggregate_rows)
    metadata = {
        "config": config_to_dict(cfg),
        "config_sha256": config_hash(cfg),
        "rng": "numpy-PCG64",
        "seed_derivation": "seed + repeat",
        "ess_estimator": ESS_ESTIMATOR,
        "backend": BACKEND,
        "package_version": __version__,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    with open(out / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
    return ExperimentResult(run_rows=run_rows, aggregate_rows=aggregate_rows,
                            output_dir=out)
