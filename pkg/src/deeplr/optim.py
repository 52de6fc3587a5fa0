"""Seeded mini-batch training with Adam or plain SGD."""

import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, TrainingDivergedError
from .mlp import loss_and_grad

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 400
    batch_size: int = 32
    seed: int = 0
    # mean/variance head only: variance branch is frozen for this many epochs
    variance_warmup_epochs: int = 0
    # mean/variance head only: variance branch never trains (used when retraining on relabelled targets)
    freeze_variance: bool = False

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise DomainError(f"unknown optimizer {self.optimizer!r}")
        if not self.lr >= 0:
            raise DomainError("lr must be nonnegative")
        if self.epochs < 1:
            raise DomainError("epochs must be >= 1")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if self.variance_warmup_epochs < 0:
            raise DomainError("variance_warmup_epochs must be >= 0")

    def with_seed(self, seed):
        return TrainConfig(**{**asdict(self), "seed": int(seed)})

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0)


def derive_seed(seed, tag):
    """Independent integer seed for a named sub-stream of ``seed``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(str(tag).encode())])
    return int(ss.generate_state(1)[0])


def make_batches(n, batch_size, epoch_seed):
    """Shuffle ``range(n)`` with a seeded permutation and cut it into batches."""
    if n < 1:
        raise DomainError("dataset must have at least one record")
    perm = np.random.default_rng(epoch_seed).permutation(n)
    return [perm[i:i + batch_size] for i in range(0, n, batch_size)]


def adam_step(params, grad, state, config):
    state.step += 1
    state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad
    state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad * grad
    m_hat = state.m / (1.0 - config.beta1 ** state.step)
    v_hat = state.v / (1.0 - config.beta2 ** state.step)
    return params - config.lr * m_hat / (np.sqrt(v_hat) + config.eps)


def train(spec, init, data, head, config: TrainConfig, callback=None):
    """Train from ``init`` on ``data`` and return the final parameter vector.

    Optimizer state always starts fresh. Batches are reshuffled every epoch
    from a seed derived from ``(config.seed, epoch)``, so a run is fully
    determined by ``(init, data, config)``. ``callback(epoch, params)`` is
    called after every epoch when given.
    """
    if len(data) == 0:
        raise DomainError("cannot train on an empty dataset")
    head.check_spec(spec)
    params = np.array(init, dtype=np.float64, copy=True)
    state = AdamState.zeros(params.size)
    frozen = None
    if head.kind == "mean_variance_gaussian" and (config.variance_warmup_epochs > 0 or config.freeze_variance):
        frozen = spec.branch_mask(1)
    freeze_until = config.epochs if config.freeze_variance else config.variance_warmup_epochs

    for epoch in range(config.epochs):
        seed = np.random.SeedSequence([int(config.seed) & 0xFFFFFFFF, epoch])
        for b, idx in enumerate(make_batches(len(data), config.batch_size, seed)):
            loss, grad = loss_and_grad(spec, params, data.subset(idx), head)
            if not np.isfinite(loss) or loss > DIVERGENCE_LIMIT:
                raise TrainingDivergedError(
                    f"loss {loss!r} at epoch {epoch}, batch {b}", epoch=epoch, batch=b)
            if frozen is not None and epoch < freeze_until:
                grad[frozen] = 0.0
            if config.optimizer == "adam":
                params = adam_step(params, grad, state, config)
            else:
                params = params - config.lr * grad
        if callback is not None:
            callback(epoch, params)
    return params


def full_loss(spec, params, data, head):
    return loss_and_grad(spec, params, data, head)[0]
