import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deeplr.dataset import WeightedDataset
from deeplr.errors import DomainError
from deeplr.harness import experiments
from deeplr.harness.cli import main
from deeplr.harness.config import ExperimentConfig, preset
from deeplr.harness.experiments import Normalizer, run_coverage, run_experiment
from deeplr.harness.generators import (
    gen_toy_classification,
    gen_toy_regression,
    gen_two_moons,
    two_moons_clean,
)
from deeplr.harness.montecarlo import gaussian_mean_lr_statistics, run_markov_mc, run_wilks_mc


def test_toy_regression_generator():
    d = gen_toy_regression(80, seed=0)
    x = d.x[:, 0]
    assert len(d) == 80 and np.all(d.w == 1.0)
    assert np.all((x[:40] >= -1) & (x[:40] <= -0.2))
    assert np.all((x[40:] >= 0.2) & (x[40:] <= 1))
    assert np.array_equal(d.y, gen_toy_regression(80, seed=0).y)
    assert not np.array_equal(d.y, gen_toy_regression(80, seed=1).y)


def test_toy_classification_generator():
    d = gen_toy_classification(60, seed=3)
    x = d.x[:, 0]
    assert set(np.unique(d.y)) <= {0.0, 1.0}
    assert np.all(((x >= 0) & (x <= 0.2)) | ((x >= 0.8) & (x <= 1)))


def test_two_moons_clean_endpoints():
    x, y = two_moons_clean(4)
    assert np.allclose(x[0], [1.0, 0.0]) and np.allclose(x[1], [-1.0, 0.0])
    assert np.allclose(x[2], [0.0, 0.5]) and np.allclose(x[3], [2.0, 0.5])
    assert y.tolist() == [0.0, 0.0, 1.0, 1.0]


def test_two_moons_odd_n():
    with pytest.raises(DomainError):
        gen_two_moons(81)
    assert gen_two_moons(80, noise_sd=0.0).x.shape == (80, 2)


def test_dataset_csv_round_trip(tmp_path):
    d = gen_two_moons(10, seed=2)
    d = WeightedDataset(d.x, d.y, np.linspace(0.1, 1, 10))
    path = tmp_path / "d.csv"
    d.to_csv(path)
    back = WeightedDataset.from_csv(path)
    assert back.x.tobytes() == d.x.tobytes() and back.w.tobytes() == d.w.tobytes()
    assert path.read_text().splitlines()[0] == "x0,x1,y,weight"


def test_dataset_validation():
    with pytest.raises(DomainError):
        WeightedDataset([[0.0]], [1.0], [-1.0])
    with pytest.raises(DomainError):
        WeightedDataset([[0.0], [1.0]], [1.0], [1.0])


def test_config_round_trip(tmp_path):
    cfg = preset("two-moon", seed=4)
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    back = ExperimentConfig.load(path)
    assert back == cfg and back.config_hash() == cfg.config_hash()
    assert replace(cfg, alpha=0.1).config_hash() != cfg.config_hash()


def test_preset_overrides():
    cfg = preset("toy-regression", train={"epochs": 3})
    assert cfg.train.epochs == 3 and cfg.train.batch_size == 32
    with pytest.raises(DomainError):
        preset("mnist")


def test_normalizer_round_trip():
    y = np.array([1.0, 3.0, 8.0])
    norm = Normalizer.fit(y)
    assert np.allclose(norm.invert(norm.apply(y)), y)


def test_monte_carlo_sanity():
    t = gaussian_mean_lr_statistics(2000, 30, seed=0)
    assert np.all(t >= 0) and abs(t.mean() - 1.0) < 0.15
    assert run_wilks_mc(2000, 30, seed=1).ks < 0.05
    with pytest.raises(ValueError):
        run_wilks_mc(10)
    rep = run_markov_mc(5000, 20, alpha=0.05, seed=0)
    assert rep.threshold == pytest.approx(-2 * math.log(0.05))
    assert rep.within_bound


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000))
def test_unknown_sigma_statistic_nonnegative(seed):
    assert np.all(gaussian_mean_lr_statistics(50, 8, seed, known_sigma=False) >= -1e-12)


def _tiny(tmp_path, **kw):
    base = dict(train={"epochs": 4, "variance_warmup_epochs": 2}, grid=[[-0.5], [0.0]],
                ensemble_size=2, output=str(tmp_path))
    base.update(kw)
    return preset("toy-regression", **base)


def test_run_experiment_outputs(tmp_path):
    cfg = _tiny(tmp_path)
    path = run_experiment(cfg)
    rows = list(csv.DictReader(open(path)))
    assert list(rows[0]) == ["x0", "f_base", "lr_lo", "lr_hi", "ens_lo", "ens_hi", "truth", "flags"]
    assert len(rows) == 2
    for r in rows:
        assert float(r["lr_lo"]) <= float(r["f_base"]) <= float(r["lr_hi"])
    assert float(rows[0]["truth"]) == pytest.approx(0.5)
    manifest = json.load(open(tmp_path / "toy-regression_manifest.json"))
    assert manifest["config_hash"] == cfg.config_hash()
    assert ExperimentConfig.from_dict(manifest["config"]) == cfg
    doc = json.load(open(tmp_path / "toy-regression_intervals.json"))
    assert len(doc["deeplr"]) == len(doc["ensemble"]) == 2


def test_run_experiment_cleans_up(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("disk full")
    monkeypatch.setattr(experiments, "write_manifest", boom)
    with pytest.raises(RuntimeError):
        run_experiment(_tiny(tmp_path))
    assert list(tmp_path.iterdir()) == []


def test_coverage_bookkeeping(tmp_path):
    cfg = _tiny(tmp_path, grid=[[-0.6], [0.6]])
    full = run_coverage(cfg, 2, override=lambda lo, hi, f: (-math.inf, math.inf))
    assert full.coverage == 1.0 and full.replications == 2 and full.failures == 0
    empty = run_coverage(cfg, 2, override=lambda lo, hi, f: (f, f - 1.0))
    assert empty.coverage == 0.0
    with pytest.raises(ValueError):
        run_coverage(cfg, 1)


def test_coverage_records_failures(tmp_path, monkeypatch):
    calls = {"n": 0}
    real = experiments._coverage_task

    def flaky(task):
        calls["n"] += 1
        if task[1] == 0:
            raise FloatingPointError("nan")
        return real(task)
    monkeypatch.setattr(experiments, "_coverage_task", flaky)
    rep = run_coverage(_tiny(tmp_path), 2)
    assert rep.failures == 1 and rep.replications == 1 and "replication 0" in rep.errors[0]


def test_cli_end_to_end(tmp_path, capsys):
    data = tmp_path / "d.csv"
    ckpt = tmp_path / "net.json"
    assert main(["gen", "toy-regression", "--seed", "1", "--out", str(data)]) == 0
    cfg = _tiny(tmp_path)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(cfg.to_json())
    assert main(["train", "--data", str(data), "--checkpoint", str(ckpt), "--config", str(cfg_path)]) == 0
    capsys.readouterr()
    assert main(["ci", "--checkpoint", str(ckpt), "--data", str(data), "--x0", "0.0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["lo"] <= doc["f_base"] <= doc["hi"] and doc["x0"] == [0.0]


def test_cli_monte_carlo(tmp_path, capsys):
    assert main(["wilks-mc", "--reps", "500", "--out", str(tmp_path)]) == 0
    assert "ks" in json.loads((tmp_path / "wilks_mc.json").read_text())
    capsys.readouterr()
    assert main(["markov-mc", "--reps", "2000", "--alpha", "0.5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["alpha"] == 0.5 and doc["within_bound"]


def test_cli_error_is_json(tmp_path, capsys):
    assert main(["ci", "--checkpoint", str(tmp_path / "missing.json"), "--data", "x.csv", "--x0", "0"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "FileNotFoundError"
