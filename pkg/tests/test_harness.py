import csv
import json

import numpy as np
import pytest

from gradmcmc.errors import ConfigError, DatasetError
from gradmcmc.harness import (
    RUN_CSV_HEADER,
    ExperimentConfig,
    SamplerSpec,
    TargetSpec,
    build_target,
    config_hash,
    config_to_dict,
    load_config,
    load_csv_dataset,
    parse_config,
    run_experiment,
)


def write_json(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


MINIMAL = {"target": {"kind": "neal_gaussian", "dim": 100}, "samplers": ["gadMALAf"]}


class TestLoadConfig:
    def test_minimal_config_fully_defaulted(self, tmp_path):
        cfg = load_config(write_json(tmp_path, MINIMAL))
        assert cfg.target.kind == "neal_gaussian"
        assert cfg.target.params == {"dim": 100}
        assert [s.kind for s in cfg.samplers] == ["gadMALAf"]
        assert cfg.burn_in == 20000 and cfg.samples == 20000
        assert cfg.repeats == 10 and cfg.seed == 0 and cfg.jobs == 1

    def test_unknown_top_level_key_named(self, tmp_path):
        bad = dict(MINIMAL, learningRate=0.1)
        with pytest.raises(ConfigError, match="learningRate"):
            load_config(write_json(tmp_path, bad))

    def test_unknown_target_key_named(self, tmp_path):
        bad = {"target": {"kind": "neal_gaussian", "dim": 5, "sigma": 2},
               "samplers": ["RWM"]}
        with pytest.raises(ConfigError, match="sigma"):
            load_config(write_json(tmp_path, bad))

    def test_unknown_sampler_key_named(self, tmp_path):
        bad = {"target": {"kind": "neal_gaussian", "dim": 5},
               "samplers": [{"kind": "RWM", "stepsize": 1}]}
        with pytest.raises(ConfigError, match="stepsize"):
            load_config(write_json(tmp_path, bad))

    def test_missing_required_key_named(self, tmp_path):
        with pytest.raises(ConfigError, match="dim"):
            load_config(write_json(tmp_path, {"target": {"kind": "neal_gaussian"},
                                              "samplers": ["RWM"]}))
        with pytest.raises(ConfigError, match="samplers"):
            load_config(write_json(tmp_path, {"target": {"kind": "neal_gaussian",
                                                         "dim": 3}}))

    def test_unknown_kinds_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="funnel"):
            load_config(write_json(tmp_path, {"target": {"kind": "funnel"},
                                              "samplers": ["RWM"]}))
        with pytest.raises(ConfigError, match="NUTS"):
            load_config(write_json(tmp_path,
                                   {"target": {"kind": "neal_gaussian", "dim": 2},
                                    "samplers": ["NUTS"]}))

    def test_invalid_json_and_missing_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(path)
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.json")

    def test_missing_dataset_rejected_at_load_time(self, tmp_path):
        bad = {"target": {"kind": "logistic_regression",
                          "dataset": str(tmp_path / "nope.csv")},
               "samplers": ["MALA"]}
        with pytest.raises(ConfigError, match="does not exist"):
            load_config(write_json(tmp_path, bad))

    def test_duplicate_labels_rejected(self, tmp_path):
        bad = {"target": {"kind": "neal_gaussian", "dim": 2},
               "samplers": ["RWM", "RWM"]}
        with pytest.raises(ConfigError, match="label"):
            load_config(write_json(tmp_path, bad))

    def test_round_trip(self, tmp_path):
        payload = {
            "target": {"kind": "kernel_gaussian", "grid_points": 13},
            "samplers": [{"kind": "gadMALAf", "eta": 0.0002},
                         {"kind": "HMC", "label": "HMC-5", "leapfrog_steps": 5}],
            "burn_in": 100, "samples": 200, "repeats": 2, "seed": 9,
        }
        cfg = load_config(write_json(tmp_path, payload))
        again = parse_config(json.loads(json.dumps(config_to_dict(cfg))))
        assert again == cfg
        assert config_hash(again) == config_hash(cfg)


class TestCsvDataset:
    def test_tiny_file(self, tmp_path):
        path = tmp_path / "tiny.csv"
        path.write_text("1,0\n3,1\n")
        ds = load_csv_dataset(path)
        assert ds.features.shape == (2, 2)
        np.testing.assert_allclose(ds.features[:, 0], [-1.0, 1.0])
        np.testing.assert_allclose(ds.features[:, 1], [1.0, 1.0])
        np.testing.assert_allclose(ds.labels, [0.0, 1.0])

    def test_header_autodetected(self, tmp_path):
        path = tmp_path / "head.csv"
        path.write_text("age,income,label\n1,2,0\n3,4,1\n")
        ds = load_csv_dataset(path)
        assert ds.num_points == 2
        assert ds.dim == 3

    def test_caravan_shaped_file(self, tmp_path):
        # same shape as the hardest benchmark dataset: 5822 rows, 86 features
        rng = np.random.default_rng(0)
        rows = rng.standard_normal((5822, 86))
        labels = (rng.random(5822) < 0.06).astype(int)
        path = tmp_path / "caravan_shaped.csv"
        with open(path, "w") as fh:
            for row, label in zip(rows, labels):
                fh.write(",".join(f"{v:.4f}" for v in row) + f",{label}\n")
        ds = load_csv_dataset(path)
        assert ds.num_points == 5822
        assert ds.dim == 87

    def test_non_binary_label_rejected_with_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,0\n2,2\n")
        with pytest.raises(DatasetError, match="row 2"):
            load_csv_dataset(path)

    def test_ragged_row_rejected_with_row(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1,2,0\n1,0\n")
        with pytest.raises(DatasetError, match="row 2"):
            load_csv_dataset(path)

    def test_non_numeric_cell_rejected_with_row(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("a,b\n1,0\nx,1\n")
        with pytest.raises(DatasetError, match="row 3"):
            load_csv_dataset(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DatasetError):
            load_csv_dataset(path)


def small_config(tmp_path, **overrides):
    base = {
        "target": {"kind": "neal_gaussian", "dim": 3},
        "samplers": ["gadMALAf", "MALA"],
        "burn_in": 200,
        "samples": 300,
        "repeats": 2,
        "seed": 5,
        "output_dir": str(tmp_path / "out"),
    }
    base.update(overrides)
    return parse_config(base)


class TestRunExperiment:
    def test_row_counts(self, tmp_path):
        result = run_experiment(small_config(tmp_path))
        assert len(result.run_rows) == 4
        assert len(result.aggregate_rows) == 2

    def test_run_csv_header_is_exact(self, tmp_path):
        result = run_experiment(small_config(tmp_path))
        first_line = (result.output_dir / "runs.csv").read_text().splitlines()[0]
        assert first_line == RUN_CSV_HEADER

    def test_seeds_derived_additively(self, tmp_path):
        result = run_experiment(small_config(tmp_path))
        by_repeat = {(r["sampler"], r["repeat"]): r["seed"] for r in result.run_rows}
        assert by_repeat[("gadMALAf", 0)] == 5
        assert by_repeat[("gadMALAf", 1)] == 6

    def test_determinism_apart_from_wall_time_columns(self, tmp_path):
        ca = small_config(tmp_path, output_dir=str(tmp_path / "a"))
        cb = small_config(tmp_path, output_dir=str(tmp_path / "b"))
        ra = run_experiment(ca)
        rb = run_experiment(cb)
        volatile = {"time_s", "min_ess_per_s"}
        for rowa, rowb in zip(ra.run_rows, rb.run_rows):
            for key in rowa:
                if key not in volatile:
                    assert rowa[key] == rowb[key], key

    def test_aggregates_are_recomputable_from_run_rows(self, tmp_path):
        result = run_experiment(small_config(tmp_path))
        with open(result.output_dir / "runs.csv") as fh:
            rows = list(csv.DictReader(fh))
        with open(result.output_dir / "summary.csv") as fh:
            aggs = list(csv.DictReader(fh))
        for agg in aggs:
            mine = [r for r in rows if r["sampler"] == agg["sampler"] and not r["error"]]
            assert int(agg["repeats_completed"]) == len(mine)
            for col in ("ess_min", "accept_rate", "min_ess_per_s"):
                assert float(agg[col]) == pytest.approx(
                    float(np.mean([float(r[col]) for r in mine])), rel=1e-12)

    def test_per_run_failures_recorded_and_excluded(self, tmp_path):
        cfg = small_config(
            tmp_path,
            samplers=[{"kind": "RWM", "label": "broken", "initial_scale": -1.0},
                      "MALA"])
        result = run_experiment(cfg)
        broken = [r for r in result.run_rows if r["sampler"] == "broken"]
        assert all(r["error"] for r in broken)
        assert all(r["ess_min"] == "" for r in broken)
        agg = {a["sampler"]: a for a in result.aggregate_rows}
        assert agg["broken"]["repeats_completed"] == 0
        assert agg["MALA"]["repeats_completed"] == 2

    def test_metadata_provenance(self, tmp_path):
        cfg = small_config(tmp_path)
        result = run_experiment(cfg)
        meta = json.loads((result.output_dir / "metadata.json").read_text())
        assert meta["config_sha256"] == config_hash(cfg)
        assert meta["rng"] == "numpy-PCG64"
        assert meta["seed_derivation"] == "seed + repeat"
        assert meta["ess_estimator"] == "geyer_initial_positive_sequence"
        assert meta["backend"] in ("compiled", "python")
        assert parse_config(meta["config"]) == cfg

    def test_plot_data_emitted_for_first_repeat(self, tmp_path):
        cfg = small_config(tmp_path)
        result = run_experiment(cfg)
        plots = result.output_dir / "plots"
        trace = plots / "gadMALAf_neal_gaussian_coord2_trace.dat"
        logpi = plots / "gadMALAf_neal_gaussian_logpi.dat"
        scales = plots / "gadMALAf_neal_gaussian_scales.dat"
        assert trace.exists() and logpi.exists() and scales.exists()
        assert len(trace.read_text().splitlines()) == cfg.samples
        assert len(logpi.read_text().splitlines()) == cfg.burn_in + cfg.samples
        lines = scales.read_text().splitlines()
        assert len(lines) == 3  # one per dimension
        assert len(lines[0].split()) == 3  # index, learned, true scale

    def test_parallel_jobs_match_sequential(self, tmp_path):
        ca = small_config(tmp_path, output_dir=str(tmp_path / "seq"))
        cb = small_config(tmp_path, output_dir=str(tmp_path / "par"), jobs=2)
        ra = run_experiment(ca)
        rb = run_experiment(cb)
        volatile = {"time_s", "min_ess_per_s"}
        for rowa, rowb in zip(ra.run_rows, rb.run_rows):
            for key in rowa:
                if key not in volatile:
                    assert rowa[key] == rowb[key]


class TestBuildTarget:
    def test_all_kinds_constructible(self, tmp_path):
        data_path = tmp_path / "d.csv"
        data_path.write_text("0.5,0\n1.5,1\n-0.5,0\n2.5,1\n")
        specs = [
            TargetSpec("neal_gaussian", {"dim": 4}),
            TargetSpec("correlated_gaussian", {"correlation": 0.8}),
            TargetSpec("kernel_gaussian", {"grid_points": 9, "low": 0.0, "high": 4.0}),
            TargetSpec("logistic_regression", {"dataset": str(data_path),
                                               "prior_variance": 10.0,
                                               "standardize": True}),
            TargetSpec("synthetic_logistic", {"num_points": 30, "num_features": 2,
                                              "prior_variance": 100.0, "data_seed": 1}),
        ]
        dims = [build_target(s).dim for s in specs]
        assert dims == [4, 2, 9, 2, 3]

    def test_experiment_config_direct_construction(self):
        cfg = ExperimentConfig(target=TargetSpec("neal_gaussian", {"dim": 2}),
                               samplers=[SamplerSpec("RWM")])
        assert cfg.samplers[0].label == "RWM"
