"""Experiment runners: base fit, DeepLR and ensemble intervals over a grid, coverage studies."""

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..baselines import ensemble_interval, train_ensemble
from ..intervals import ConfidenceInterval, confidence_interval
from ..mlp import init_params
from ..optim import train
from .config import ExperimentConfig
from .generators import (
    classification_truth,
    gen_toy_classification,
    gen_toy_regression,
    gen_two_moons,
    regression_truth,
)

log = logging.getLogger(__name__)

CSV_COLUMNS = ("f_base", "lr_lo", "lr_hi", "ens_lo", "ens_hi", "truth", "flags")


@dataclass(frozen=True)
class Normalizer:
    """Affine target transform ``(y - mean) / scale``."""

    mean: float = 0.0
    scale: float = 1.0

    @classmethod
    def fit(cls, y):
        return cls(float(np.mean(y)), float(np.std(y)) or 1.0)

    def apply(self, y):
        return (np.asarray(y) - self.mean) / self.scale

    def invert(self, v):
        return v * self.scale + self.mean

    def invert_interval(self, ci: ConfidenceInterval):
        inv = self.invert
        return replace(ci, lo=inv(ci.lo), hi=inv(ci.hi), f_base=inv(ci.f_base),
                       f_plus=inv(ci.f_plus), f_minus=inv(ci.f_minus),
                       profile=[(inv(c), t) for c, t in ci.profile])


def make_dataset(config: ExperimentConfig, seed=None):
    seed = config.seed if seed is None else seed
    if config.task == "toy-regression":
        return gen_toy_regression(config.n, seed, config.noise_sd)
    if config.task == "toy-classification":
        return gen_toy_classification(config.n, seed)
    if config.task == "two-moon":
        return gen_two_moons(config.n, config.noise_sd, seed)
    raise ValueError(f"no dataset for task {config.task!r}")


def truth_at(task, x):
    x = np.asarray(x, dtype=np.float64)
    if task == "toy-regression":
        return float(regression_truth(x[0]))
    if task == "toy-classification":
        return float(classification_truth(x[0]))
    return math.nan


@dataclass
class FittedBase:
    config: ExperimentConfig
    raw: object
    data: object
    base: np.ndarray
    norm: Normalizer


def fit_base(config: ExperimentConfig, seed=None):
    """Draw the dataset, normalize regression targets, and train the base network."""
    seed = config.seed if seed is None else seed
    raw = make_dataset(config, seed)
    norm = Normalizer.fit(raw.y) if config.normalize_targets else Normalizer()
    data = raw.with_targets(norm.apply(raw.y))
    train_cfg = config.train.with_seed(seed)
    base = train(config.spec, init_params(config.spec, seed), data, config.head_obj, train_cfg)
    return FittedBase(replace(config, seed=seed, train=train_cfg), raw, data, base, norm)


def deeplr_interval(fitted: FittedBase, x0, alpha=None):
    cfg = fitted.config
    ci = confidence_interval(x0, cfg.alpha if alpha is None else alpha, fitted.data, cfg.spec,
                             fitted.base, cfg.head_obj, cfg.train, cfg.search_options)
    return fitted.norm.invert_interval(ci)


def _map(fn, items, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _grid_task(args):
    fitted, x0 = args
    return deeplr_interval(fitted, x0)


def write_manifest(path, config, extra=None):
    doc = {"config_hash": config.config_hash(), "seed": config.seed, "config": config.to_dict()}
    doc.update(extra or {})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def run_experiment(config: ExperimentConfig, workers=1):
    """Intervals from DeepLR and a deep ensemble at every grid point, written as CSV.

    Writes ``<output>/<experiment>.csv``, ``<experiment>_intervals.json`` and
    ``<experiment>_manifest.json``. Returns the CSV path. Nothing is left
    behind if a run fails half-way.
    """
    os.makedirs(config.output, exist_ok=True)
    stem = os.path.join(config.output, config.experiment)
    paths = [stem + ".csv", stem + "_intervals.json", stem + "_manifest.json"]
    try:
        fitted = fit_base(config)
        head = config.head_obj
        intervals = _map(_grid_task, [(fitted, x0) for x0 in config.grid], workers)
        ensemble = train_ensemble(config.spec, fitted.data, head, fitted.config.train, config.ensemble_size)
        ens = [fitted.norm.invert_interval(ensemble_interval(ensemble, x0, config.alpha, head))
               for x0 in config.grid]
        dim = len(config.grid[0])
        with open(paths[0], "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"x{j}" for j in range(dim)] + list(CSV_COLUMNS))
            for x0, ci, e in zip(config.grid, intervals, ens):
                writer.writerow([repr(v) for v in x0] + [
                    repr(ci.f_base), repr(ci.lo), repr(ci.hi), repr(e.lo), repr(e.hi),
                    repr(truth_at(config.task, x0)), ";".join(ci.diagnostics)])
        with open(paths[1], "w") as fh:
            json.dump({"deeplr": [ci.to_dict() for ci in intervals],
                       "ensemble": [e.to_dict() for e in ens]}, fh)
        write_manifest(paths[2], config, {"normalization": {"mean": fitted.norm.mean,
                                                             "scale": fitted.norm.scale}})
    except BaseException:
        for p in paths:
            if os.path.exists(p):
                os.remove(p)
        raise
    return paths[0]


@dataclass
class CoverageReport:
    nominal: float
    replications: int
    grid: list
    hits: list
    coverage: float
    point_coverage: list
    mean_width: float
    mean_asymmetry: float
    failures: int = 0
    errors: list = field(default_factory=list)

    def to_dict(self):
        return dict(self.__dict__)


def _coverage_task(args):
    config, rep = args
    fitted = fit_base(config, seed=config.seed + rep)
    out = []
    for x0 in config.grid:
        ci = deeplr_interval(fitted, x0)
        out.append((ci.lo, ci.hi, ci.f_base))
    return out


def run_coverage(config: ExperimentConfig, R, workers=1, override=None):
    """Repeat the whole pipeline on ``R`` fresh datasets and count truth-in-interval hits.

    ``override(lo, hi, f_base) -> (lo, hi)`` replaces each interval before it
    is scored; it exists so the bookkeeping can be tested in isolation.
    """
    if R < 2:
        raise ValueError("need at least two replications")
    results, errors = [], []
    tasks = [(config, rep) for rep in range(R)]

    def guarded(task):
        try:
            return _coverage_task(task)
        except Exception as err:  # recorded, replication excluded
            errors.append(f"replication {task[1]}: {type(err).__name__}: {err}")
            return None

    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_coverage_task, t) for t in tasks]
            for t, fut in zip(tasks, futures):
                try:
                    results.append(fut.result())
                except Exception as err:
                    errors.append(f"replication {t[1]}: {type(err).__name__}: {err}")
    else:
        results = [r for r in map(guarded, tasks) if r is not None]

    truths = [truth_at(config.task, x0) for x0 in config.grid]
    hits = [0] * len(config.grid)
    widths, asym = [], []
    for rep in results:
        for j, (lo, hi, f) in enumerate(rep):
            if override is not None:
                lo, hi = override(lo, hi, f)
            hits[j] += int(lo <= truths[j] <= hi)
            if math.isfinite(hi - lo) and hi >= lo:
                widths.append(hi - lo)
            if f > lo and math.isfinite(hi) and math.isfinite(lo):
                asym.append((hi - f) / (f - lo))
    done = len(results)
    total = done * len(config.grid)
    return CoverageReport(
        nominal=1.0 - config.alpha, replications=done, grid=config.grid, hits=hits,
        coverage=sum(hits) / total if total else math.nan,
        point_coverage=[h / done if done else math.nan for h in hits],
        mean_width=float(np.mean(widths)) if widths else math.nan,
        mean_asymmetry=float(np.mean(asym)) if asym else math.nan,
        failures=len(errors), errors=errors,
    )
