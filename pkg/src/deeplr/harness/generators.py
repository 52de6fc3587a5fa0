"""Synthetic datasets used by the experiments."""

import numpy as np

from ..dataset import WeightedDataset
from ..errors import DomainError


def _check_even(n):
    if n < 2 or n % 2:
        raise DomainError(f"n must be a positive even number, got {n}")


def regression_truth(x):
    return 2.0 * np.asarray(x, dtype=np.float64) ** 2


def classification_truth(x):
    return 0.5 + 0.4 * np.cos(6.0 * np.asarray(x, dtype=np.float64))


def gen_toy_regression(n=80, seed=0, noise_sd=0.1):
    """Half the inputs uniform on [-1, -0.2], half on [0.2, 1]; y ~ N(2x^2, noise_sd^2)."""
    _check_even(n)
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.uniform(-1.0, -0.2, n // 2), rng.uniform(0.2, 1.0, n // 2)])
    y = regression_truth(x) + noise_sd * rng.standard_normal(n)
    return WeightedDataset.unweighted(x.reshape(-1, 1), y)


def gen_toy_classification(n=60, seed=0):
    """Inputs on [0, 0.2] and [0.8, 1]; y ~ Bernoulli(0.5 + 0.4 cos 6x)."""
    _check_even(n)
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.uniform(0.0, 0.2, n // 2), rng.uniform(0.8, 1.0, n // 2)])
    y = (rng.uniform(size=n) < classification_truth(x)).astype(np.float64)
    return WeightedDataset.unweighted(x.reshape(-1, 1), y)


def two_moons_clean(n):
    """Noise-free points of the two interleaving half circles, label 0 first."""
    _check_even(n)
    t = np.linspace(0.0, np.pi, n // 2)
    a = np.column_stack([np.cos(t), np.sin(t)])
    b = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    return np.vstack([a, b]), np.repeat([0.0, 1.0], n // 2)


def gen_two_moons(n=80, noise_sd=0.1, seed=0):
    x, y = two_moons_clean(n)
    if noise_sd > 0:
        x = x + noise_sd * np.random.default_rng(seed).standard_normal(x.shape)
    return WeightedDataset.unweighted(x, y)
