"""Deep-ensemble comparison intervals."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TrainingDivergedError
from .intervals import ConfidenceInterval, output_at
from .mlp import MlpSpec, init_params
from .optim import train
from .stats import normal_quantile


@dataclass
class Ensemble:
    spec: MlpSpec
    members: list
    seeds: list

    def __post_init__(self):
        if len(self.members) < 2:
            raise DomainError("an ensemble needs at least two members")
        if len(set(self.seeds)) != len(self.seeds):
            raise DomainError("ensemble member seeds must be distinct")

    def __len__(self):
        return len(self.members)


def train_ensemble(spec, data, head, config, M=10):
    """Train ``M`` networks from independent inits; member ``j`` uses seed ``config.seed + j``."""
    if M < 2:
        raise DomainError("an ensemble needs at least two members")
    members, seeds = [], []
    for j in range(M):
        seed = config.seed + j
        try:
            members.append(train(spec, init_params(spec, seed), data, head, config.with_seed(seed)))
        except TrainingDivergedError as err:
            err.member = j
            raise
        seeds.append(seed)
    return Ensemble(spec, members, seeds)


def ensemble_interval(ensemble, x0, alpha, head):
    """Normal-approximation interval ``m +- z * s`` over the members' outputs at ``x0``."""
    x0 = np.asarray(x0, dtype=np.float64).reshape(1, -1)
    outs = np.array([float(output_at(ensemble.spec, p, head, x0)[0]) for p in ensemble.members])
    m = float(outs.mean())
    s = float(outs.std(ddof=1))
    half = normal_quantile(1.0 - alpha / 2.0) * s
    lo, hi = m - half, m + half
    diagnostics = ["normal-approximation"]
    if head.is_bernoulli and (lo < 0.0 or hi > 1.0):
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        diagnostics.append("clamped-to-unit-interval")
    return ConfidenceInterval(
        lo=lo, hi=hi, alpha=alpha, dof=0, f_base=m, f_plus=float(outs.max()),
        f_minus=float(outs.min()), x0=tuple(float(v) for v in x0.reshape(-1)),
        diagnostics=diagnostics, method="ensemble",
    )
