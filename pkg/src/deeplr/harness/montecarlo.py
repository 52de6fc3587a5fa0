"""Monte-Carlo checks of the chi-square claims on models where everything is known."""

import math
from dataclasses import dataclass

import numpy as np

from ..stats import chi2_cdf, ks_distance


@dataclass
class WilksReport:
    reps: int
    n_per_rep: int
    known_sigma: bool
    ks: float
    mean_t: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class MarkovReport:
    reps: int
    n_per_rep: int
    alpha: float
    threshold: float
    rate: float
    mc_tolerance: float

    @property
    def within_bound(self):
        return self.rate <= self.alpha + self.mc_tolerance

    def to_dict(self):
        return {**self.__dict__, "within_bound": self.within_bound}


def gaussian_mean_lr_statistics(reps, n_per_rep, seed, known_sigma=True, mu=0.0):
    """LR statistics for H0: mean == mu on normal samples drawn under H0.

    With known unit variance the statistic is ``n * (ybar - mu)**2``; with the
    variance profiled out it is ``n * log(S0 / S1)`` with ``S0``, ``S1`` the
    residual sums of squares around ``mu`` and around ``ybar``.
    """
    rng = np.random.default_rng(seed)
    y = mu + rng.standard_normal((reps, n_per_rep))
    ybar = y.mean(axis=1)
    if known_sigma:
        return n_per_rep * (ybar - mu) ** 2
    s0 = ((y - mu) ** 2).sum(axis=1)
    s1 = ((y - ybar[:, None]) ** 2).sum(axis=1)
    return n_per_rep * np.log(s0 / s1)


def run_wilks_mc(reps=10_000, n_per_rep=50, seed=0, known_sigma=True):
    if reps < 100:
        raise ValueError("need at least 100 replications")
    t = gaussian_mean_lr_statistics(reps, n_per_rep, seed, known_sigma)
    ks = ks_distance(t, lambda x: chi2_cdf(x, 1))
    return WilksReport(reps, n_per_rep, known_sigma, ks, float(t.mean()))


def run_markov_mc(reps=20_000, n_per_rep=20, alpha=0.05, seed=0, mu1=0.5):
    """Rejection rate of the simple-vs-simple LR test N(0,1) vs N(mu1,1) under H0.

    Rejects when ``2 * (loglik1 - loglik0) > -2 log(alpha)``, the closed-form
    chi-square(2) quantile.
    """
    if reps < 1000:
        raise ValueError("need at least 1000 replications")
    y = np.random.default_rng(seed).standard_normal((reps, n_per_rep))
    ll0 = -0.5 * (y ** 2).sum(axis=1)
    ll1 = -0.5 * ((y - mu1) ** 2).sum(axis=1)
    t = 2.0 * (ll1 - ll0)
    threshold = -2.0 * math.log(alpha)
    rate = float(np.mean(t > threshold))
    tol = 3.0 * math.sqrt(alpha * (1.0 - alpha) / reps)
    return MarkovReport(reps, n_per_rep, alpha, threshold, rate, tol)
