"""Likelihood-ratio confidence intervals for neural-network outputs."""

from .dataset import WeightedDataset
from .heads import DistParams, Head, combine_params
from .intervals import (
    ConfidenceInterval,
    PerturbedPair,
    SearchOptions,
    build_augmented_dataset,
    confidence_interval,
    interval_from_pair,
    train_perturbed_pair,
)
from .mlp import MlpSpec, forward, init_params, loss_and_grad
from .optim import TrainConfig, make_batches, train

__all__ = [
    "ConfidenceInterval",
    "DistParams",
    "Head",
    "MlpSpec",
    "PerturbedPair",
    "SearchOptions",
    "TrainConfig",
    "WeightedDataset",
    "build_augmented_dataset",
    "combine_params",
    "confidence_interval",
    "forward",
    "init_params",
    "interval_from_pair",
    "loss_and_grad",
    "make_batches",
    "train",
    "train_perturbed_pair",
]
