"""Distribution heads: raw network outputs -> conditional densities.

Three families are supported:

* ``homoscedastic_gaussian``: one linear output (the mean). The noise
  variance is either fixed (``noise_variance``) or profiled out as the mean
  squared residual when a dataset log-likelihood is evaluated.
* ``mean_variance_gaussian``: a mean branch and a variance branch; the
  variance is ``softplus(raw) + 1e-6``.
* ``bernoulli_logit``: one logit, turned into a clamped class-1 probability.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DomainError
from .mlp import sigmoid

VARIANCE_FLOOR = 1e-6
PROB_EPS = 1e-7
HEAD_KINDS = ("homoscedastic_gaussian", "mean_variance_gaussian", "bernoulli_logit")
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class DistParams:
    """Per-example distribution parameters (arrays or scalars).

    Gaussian heads fill ``mean`` and ``variance`` (``variance`` may be None for
    a profiled homoscedastic head); the Bernoulli head fills ``prob``.
    """

    mean: Optional[np.ndarray] = None
    variance: Optional[np.ndarray] = None
    prob: Optional[np.ndarray] = None

    @property
    def is_bernoulli(self):
        return self.prob is not None


def softplus(r):
    return np.logaddexp(0.0, r)


def clamp_prob(p):
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


@dataclass(frozen=True)
class Head:
    kind: str
    noise_variance: Optional[float] = None

    def __post_init__(self):
        if self.kind not in HEAD_KINDS:
            raise DomainError(f"unknown head kind {self.kind!r}")
        if self.noise_variance is not None and not self.noise_variance > 0:
            raise DomainError("noise_variance must be positive")

    @property
    def is_bernoulli(self):
        return self.kind == "bernoulli_logit"

    @property
    def n_branches(self):
        return 2 if self.kind == "mean_variance_gaussian" else 1

    def check_spec(self, spec):
        if len(spec.branches) != self.n_branches:
            raise DomainError(f"{self.kind} needs {self.n_branches} branch(es)")
        if any(b[-1] != 1 for b in spec.branches):
            raise DomainError("every branch must end in a single output unit")
        if spec.output_activations[0] != "linear":
            raise DomainError(f"{self.kind} expects a linear first output")

    def _split(self, raw):
        if not isinstance(raw, (tuple, list)):
            raw = (raw,)
        if len(raw) != self.n_branches:
            raise DomainError(f"{self.kind} expects {self.n_branches} raw output(s), got {len(raw)}")
        return [np.asarray(r, dtype=np.float64).reshape(-1) for r in raw]

    def params_from_outputs(self, raw, variance=None) -> DistParams:
        parts = self._split(raw)
        if self.kind == "bernoulli_logit":
            return DistParams(prob=clamp_prob(sigmoid(parts[0])))
        if self.kind == "mean_variance_gaussian":
            return DistParams(mean=parts[0], variance=softplus(parts[1]) + VARIANCE_FLOOR)
        if variance is None:
            variance = self.noise_variance
        return DistParams(mean=parts[0], variance=variance)

    def log_likelihood(self, params: DistParams, y):
        """Per-example log density of ``y``."""
        y = np.asarray(y, dtype=np.float64)
        if self.is_bernoulli:
            p = params.prob
            return y * np.log(p) + (1.0 - y) * np.log1p(-p)
        var = params.variance
        if var is None:
            raise DomainError("homoscedastic head needs a variance; use dataset_log_likelihood to profile it")
        return -0.5 * (_LOG_2PI + np.log(var)) - (y - params.mean) ** 2 / (2.0 * var)

    def dataset_log_likelihood(self, params: DistParams, y) -> float:
        """Summed log-likelihood over a dataset.

        For a homoscedastic head without a fixed noise variance the variance is
        replaced by its maximum-likelihood value, the mean squared residual.
        """
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if self.kind == "homoscedastic_gaussian" and params.variance is None:
            sigma2 = max(float(np.mean((y - params.mean) ** 2)), 1e-12)
            params = replace(params, variance=sigma2)
        return float(np.sum(self.log_likelihood(params, y)))

    def output_of_interest(self, params: DistParams):
        return params.prob if self.is_bernoulli else params.mean

    def nll_and_grad(self, outputs, y):
        """Training NLL per example and its derivative w.r.t. each raw output.

        The Bernoulli loss is evaluated directly on the logit; likelihoods used
        for inference (``log_likelihood``) go through the clamped probability.

        Returns ``(nll, [d_branch0, ...])`` with every derivative shaped ``(n, 1)``.
        """
        parts = self._split(outputs)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if self.is_bernoulli:
            # logit form: no clamp, so saturated logits still receive a gradient
            z = parts[0]
            nll = softplus(z) - y * z
            return nll, [(sigmoid(z) - y)[:, None]]
        mean = parts[0]
        resid = y - mean
        if self.kind == "homoscedastic_gaussian":
            var = self.noise_variance or 1.0
            nll = 0.5 * (_LOG_2PI + math.log(var)) + resid ** 2 / (2.0 * var)
            return nll, [(-resid / var)[:, None]]
        r = parts[1]
        var = softplus(r) + VARIANCE_FLOOR
        nll = 0.5 * (_LOG_2PI + np.log(var)) + resid ** 2 / (2.0 * var)
        d_var = 0.5 / var - resid ** 2 / (2.0 * var ** 2)
        return nll, [(-resid / var)[:, None], (d_var * sigmoid(r))[:, None]]


def _logit(p):
    return np.log(p) - np.log1p(-p)


def combine_params(base: DistParams, perturbed: DistParams, lam, space="natural") -> DistParams:
    """``(1 - lam) * base + lam * perturbed``, parameter by parameter.

    ``space="natural"`` mixes probabilities, means and variances directly.
    ``space="logit"`` mixes Bernoulli parameters on the logit scale instead
    (Gaussian parameters are unaffected by the switch).
    """
    if base.is_bernoulli != perturbed.is_bernoulli:
        raise DomainError("cannot combine parameters of different head kinds")
    if base.is_bernoulli:
        if space == "logit":
            z = (1.0 - lam) * _logit(base.prob) + lam * _logit(perturbed.prob)
            return DistParams(prob=clamp_prob(sigmoid(z)))
        if space != "natural":
            raise DomainError(f"unknown combination space {space!r}")
        return DistParams(prob=clamp_prob((1.0 - lam) * base.prob + lam * perturbed.prob))
    mean = (1.0 - lam) * base.mean + lam * perturbed.mean
    if base.variance is None or perturbed.variance is None:
        return DistParams(mean=mean)
    var = np.maximum((1.0 - lam) * np.asarray(base.variance) + lam * np.asarray(perturbed.variance),
                     VARIANCE_FLOOR)
    return DistParams(mean=mean, variance=var)


def lambda_for_target(f_base, f_dir, c, space="natural"):
    """Mixing weight that makes the combined output of interest equal ``c``."""
    if space == "logit":
        f_base, f_dir, c = (float(_logit(clamp_prob(v))) for v in (f_base, f_dir, c))
    return (c - f_base) / (f_dir - f_base)
