"""Experiment configuration documents and named presets."""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from ..errors import DomainError
from ..heads import Head
from ..intervals import SearchOptions
from ..mlp import MlpSpec
from ..optim import TrainConfig

EXPERIMENTS = ("toy-regression", "toy-classification", "two-moon", "coverage", "wilks-mc", "markov-mc")


@dataclass
class ExperimentConfig:
    experiment: str
    task: str = "toy-regression"
    seed: int = 0
    n: int = 80
    noise_sd: float = 0.1
    head: str = "mean_variance_gaussian"
    spec: MlpSpec = None
    train: TrainConfig = field(default_factory=TrainConfig)
    alpha: float = 0.05
    dof: int = 1
    delta: float = 1.0
    lambda_max: float = 10.0
    grid: list = field(default_factory=list)
    ensemble_size: int = 10
    normalize_targets: bool = True
    output: str = "out"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        self.grid = [[float(v) for v in np.atleast_1d(p)] for p in self.grid]
        if self.experiment not in ("wilks-mc", "markov-mc") and not self.grid:
            raise DomainError("evaluation grid must be nonempty")

    @property
    def head_obj(self):
        return Head(self.head)

    @property
    def search_options(self):
        return SearchOptions(dof=self.dof, delta=self.delta, lambda_max=self.lambda_max,
                             on_unreachable="collapse")

    def to_dict(self):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["spec"] = self.spec.to_dict() if self.spec is not None else None
        d["train"] = self.train.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise DomainError(f"unknown config fields: {sorted(unknown)}")
        if d.get("spec") is not None:
            d["spec"] = MlpSpec.from_dict(d["spec"])
        if "train" in d:
            d["train"] = TrainConfig.from_dict(d["train"])
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def config_hash(self):
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


def regression_spec(l2=1e-4):
    return MlpSpec(1, ((40, 30, 20, 1), (5, 2, 1)), "elu", ("linear", "raw_variance"), l2)


def classifier_spec(input_dim=1, l2=1e-5):
    return MlpSpec(input_dim, ((30, 30, 30, 1),), "elu", ("linear",), l2)


def line_grid(lo, hi, k):
    return [[float(v)] for v in np.linspace(lo, hi, k)]


def lattice_grid(xs, ys):
    return [[float(x), float(y)] for y in ys for x in xs]


def preset(name, **overrides):
    """Named experiment setups; keyword overrides replace fields (``train`` may be a dict)."""
    if name == "toy-regression":
        cfg = ExperimentConfig(
            experiment="toy-regression", task="toy-regression", n=80, noise_sd=0.1,
            head="mean_variance_gaussian", spec=regression_spec(),
            train=TrainConfig(epochs=400, batch_size=32, variance_warmup_epochs=200),
            grid=line_grid(-1.0, 1.0, 41), normalize_targets=True,
        )
    elif name == "toy-classification":
        cfg = ExperimentConfig(
            experiment="toy-classification", task="toy-classification", n=60,
            head="bernoulli_logit", spec=classifier_spec(1, 1e-5),
            train=TrainConfig(epochs=300, batch_size=32),
            grid=line_grid(0.0, 1.0, 41), normalize_targets=False,
        )
    elif name == "two-moon":
        cfg = ExperimentConfig(
            experiment="two-moon", task="two-moon", n=80, noise_sd=0.1,
            head="bernoulli_logit", spec=classifier_spec(2, 1e-3),
            train=TrainConfig(epochs=500, batch_size=32),
            grid=lattice_grid(np.linspace(-2.5, 3.5, 7), np.linspace(-2.0, 2.5, 6)),
            normalize_targets=False,
        )
    elif name == "coverage":
        cfg = replace(preset("toy-regression"), experiment="coverage", grid=[[-0.6], [0.6]])
    elif name in ("wilks-mc", "markov-mc"):
        cfg = ExperimentConfig(experiment=name, task=name)
    else:
        raise DomainError(f"unknown preset {name!r}")
    if "train" in overrides and isinstance(overrides["train"], dict):
        overrides["train"] = replace(cfg.train, **overrides["train"])
    return replace(cfg, **overrides)
