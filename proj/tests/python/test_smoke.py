"""End-to-end smoke tests for the Python module and the CLI."""

import csv
import json
import math
import os
import subprocess

import pytest

import fedsim


BASE_CONFIG = {
    "arch": [2, 4, 2],
    "n_clients": 4,
    "clients_per_round": 2,
    "local_steps": 2,
    "batch_size": 4,
    "rounds": 5,
    "lr0": 0.05,
    "lr_decay": 0.98,
    "master_seed": 3,
    "data": {
        "kind": "synthetic",
        "classes": 2,
        "dim": 2,
        "n_train": 64,
        "n_test": 32,
        "spread": 0.6,
        "seed": 11,
    },
    "data_schedule": {"ratio": 0.25, "recover_round": 2},
}


def cli_path():
    path = os.environ.get("FEDSIM_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("FEDSIM_CLI does not point at the built binary")
    return path


def run_cli(*args, **kwargs):
    return subprocess.run(
        [cli_path(), *args], capture_output=True, text=True, **kwargs
    )


def test_version():
    assert fedsim.__version__ == "0.1.0"


def test_model_and_gradient():
    model = fedsim.init_model([2, 4, 2], seed=1)
    assert len(model.values) == fedsim.param_count([2, 4, 2])
    probs = fedsim.forward(model, [0.5, -0.5])
    assert len(probs) == 2
    assert math.isclose(sum(probs), 1.0, abs_tol=1e-12)

    # Finite-difference spot check on one coordinate.
    batch = [fedsim.Example([0.5, -0.5], 1), fedsim.Example([-1.0, 2.0], 0)]
    g = fedsim.grad(model, batch)
    eps = 1e-6
    lo, hi = fedsim.ModelParams(), fedsim.ModelParams()
    for dst, delta in ((lo, -eps), (hi, eps)):
        values = list(model.values)
        values[3] += delta
        dst.arch = list(model.arch)
        dst.values = values
    fd = (fedsim.loss(hi, batch) - fedsim.loss(lo, batch)) / (2 * eps)
    assert math.isclose(g.values[3], fd, rel_tol=1e-5, abs_tol=1e-8)


def test_data_pipeline():
    data = fedsim.generate_synthetic(
        num_classes=3, dim=4, n=60, spread=0.7, seed=5
    )
    assert data.size() == 60
    parts = fedsim.partition_iid(data, n_clients=4, seed=9)
    assert sorted(i for p in parts for i in p.indices) == list(range(60))
    view = fedsim.ActiveView(parts[0], 0.5)
    assert view.size == math.ceil(0.5 * len(parts[0].indices))


def test_fim_closed_form():
    model = fedsim.ModelParams()
    model.arch = [1, 2]
    model.values = [0.0] * fedsim.param_count([1, 2])
    data = fedsim.Dataset()
    data.examples = [fedsim.Example([2.0], 0)]
    data.num_classes = 2
    data.dim = 1
    part = fedsim.ClientPartition()
    part.client_id = 0
    part.indices = [0]
    part.permuted = [0]
    trace = fedsim.local_fim_trace_exact(model, data, fedsim.ActiveView(part, 1.0))
    assert math.isclose(trace, 2.5, rel_tol=1e-10)


def test_run_experiment_deterministic(tmp_path):
    config = fedsim.ExperimentConfig.from_json(json.dumps(BASE_CONFIG))
    a = fedsim.run_experiment(config)
    b = fedsim.run_experiment(config)
    assert len(a.rounds) == 5
    assert a.final_accuracy == b.final_accuracy
    assert [m.cum_trace for m in a.rounds] == [m.cum_trace for m in b.rounds]

    out = tmp_path / "run"
    fedsim.emit_run(a, str(out))
    with open(out / "metrics.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 5
    assert float(rows[-1]["test_accuracy"]) == a.final_accuracy
    record = json.loads((out / "run.json").read_text())
    assert record["version"] == "0.1.0"


def test_sweep(tmp_path):
    config = fedsim.ExperimentConfig.from_json(
        json.dumps({**BASE_CONFIG, "rounds": 3})
    )
    sweep = fedsim.sweep_recover_rounds(config, [2, 0], [1, 2])
    assert sweep.recover_rounds == [0, 2]
    assert len(sweep.runs) == 4
    fedsim.emit_sweep(sweep, str(tmp_path / "sweep"))
    assert (tmp_path / "sweep" / "sweep.csv").exists()
    assert (tmp_path / "sweep" / "m0_seed1" / "metrics.csv").exists()


def test_config_errors_map_to_python():
    bad = {**BASE_CONFIG, "clients_per_round": 99}
    with pytest.raises(ValueError):
        fedsim.ExperimentConfig.from_json(json.dumps(bad))


def test_cli_run_and_exit_codes(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(BASE_CONFIG))
    out_dir = tmp_path / "out"

    result = run_cli("run", "--config", str(config_path), "--out", str(out_dir))
    assert result.returncode == 0, result.stderr
    assert (out_dir / "metrics.csv").exists()
    assert (out_dir / "run.json").exists()

    # Config mistakes -> 2, unreadable files -> 4, malformed data -> 3.
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**BASE_CONFIG, "typo_key": 1}))
    assert run_cli("run", "--config", str(bad), "--out", str(out_dir)).returncode == 2

    missing = tmp_path / "missing.json"
    assert (
        run_cli("run", "--config", str(missing), "--out", str(out_dir)).returncode == 4
    )

    broken_csv = tmp_path / "broken.csv"
    broken_csv.write_text("not,a,number,row\n")
    csv_config = tmp_path / "csv_config.json"
    csv_config.write_text(
        json.dumps(
            {
                **BASE_CONFIG,
                "data": {
                    "kind": "csv",
                    "train": str(broken_csv),
                    "test": str(broken_csv),
                },
            }
        )
    )
    assert (
        run_cli("run", "--config", str(csv_config), "--out", str(out_dir)).returncode
        == 3
    )


def test_cli_gen_data_round_trip(tmp_path):
    out = tmp_path / "data.csv"
    result = run_cli(
        "gen-data",
        "--classes", "3",
        "--dim", "2",
        "--n", "30",
        "--spread", "0.8",
        "--seed", "4",
        "--out", str(out),
    )
    assert result.returncode == 0, result.stderr
    data = fedsim.load_dataset(str(out))
    assert data.size() == 30
    assert data.num_classes == 3


def test_cli_sweep(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({**BASE_CONFIG, "rounds": 3}))
    out_dir = tmp_path / "sweep"
    result = run_cli(
        "sweep",
        "--config", str(config_path),
        "--recover-rounds", "0,2",
        "--seeds", "1,2",
        "--out", str(out_dir),
    )
    assert result.returncode == 0, result.stderr
    with open(out_dir / "sweep.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert [int(r["recover_round"]) for r in rows] == [0, 2]
