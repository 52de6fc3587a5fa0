"""Likelihood-ratio confidence intervals for a single network output.

Workflow for an input ``x0``:

1. relabel the training inputs with the base network's predictions and add
   ``n_extra`` down-weighted copies of an anchor ``(x0, c_max)`` (resp.
   ``c_min``);
2. retrain copies of the base network on both augmented sets;
3. for a candidate value ``c`` mix the base and perturbed distribution
   parameters with the weight that puts the output of interest at ``c`` and
   compute ``T(c) = 2 * (loglik(base) - loglik(mix))`` on the original data;
4. keep every ``c`` with ``T(c) <= chi2_quantile(1 - alpha, dof)``, located
   by a grid probe followed by bisection in each direction.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import heads as _heads
from .dataset import WeightedDataset
from .errors import DegenerateRequestError, DomainError, UnreachableDirectionError
from .mlp import forward, sigmoid
from .optim import derive_seed, train
from .stats import chi2_quantile

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchOptions:
    dof: int = 1
    delta: float = 1.0
    lambda_max: float = 10.0
    grid_points: int = 11
    max_iter: int = 60
    tol: Optional[float] = None
    space: str = "natural"
    # keep the variance branch of a mean/variance network fixed while perturbing
    freeze_variance: bool = True
    # "raise" or "collapse" (endpoint := f_base, flagged)
    on_unreachable: str = "raise"

    def __post_init__(self):
        if self.dof not in (1, 2):
            raise DomainError("dof must be 1 or 2")
        if self.lambda_max <= 0:
            raise DomainError("lambda_max must be positive")
        if self.grid_points < 2:
            raise DomainError("grid_points must be >= 2")
        if self.space not in ("natural", "logit"):
            raise DomainError(f"unknown combination space {self.space!r}")
        if self.on_unreachable not in ("raise", "collapse"):
            raise DomainError("on_unreachable must be 'raise' or 'collapse'")


@dataclass
class PerturbedPair:
    base: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    f_base: float
    f_plus: float
    f_minus: float
    x0: np.ndarray
    c_max: float
    c_min: float
    diagnostics: list = field(default_factory=list)


@dataclass
class ConfidenceInterval:
    lo: float
    hi: float
    alpha: float
    dof: int
    f_base: float
    f_plus: float
    f_minus: float
    x0: tuple
    lambda_at_endpoints: tuple = (0.0, 0.0)
    profile: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    method: str = "deeplr"

    @property
    def width(self):
        return self.hi - self.lo

    def __contains__(self, value):
        return self.lo <= value <= self.hi

    def to_dict(self):
        return {
            "method": self.method,
            "x0": [float(v) for v in self.x0],
            "alpha": self.alpha,
            "dof": self.dof,
            "lo": self.lo,
            "hi": self.hi,
            "f_base": self.f_base,
            "f_plus": self.f_plus,
            "f_minus": self.f_minus,
            "lambda_at_endpoints": [float(v) for v in self.lambda_at_endpoints],
            "profile": [[float(c), float(t)] for c, t in self.profile],
            "diagnostics": list(self.diagnostics),
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def n_extra_for(n, batch_size):
    """Anchor copies so that each batch holds two of them on average."""
    return max(1, math.ceil(2 * n / batch_size))


def output_at(spec, params, head, x):
    """Output of interest (mean or class-1 probability) at one or more inputs."""
    return head.output_of_interest(head.params_from_outputs(forward(spec, params, x)))


def _x0_row(spec, x0):
    x0 = np.asarray(x0, dtype=np.float64).reshape(1, -1)
    if x0.shape[1] != spec.input_dim:
        raise DomainError(f"x0 must have {spec.input_dim} entries")
    return x0


def build_augmented_dataset(data, spec, base, head, x0, c_target, n_extra):
    if n_extra < 1:
        raise DomainError("n_extra must be >= 1")
    preds = output_at(spec, base, head, data.x)
    relabelled = WeightedDataset(data.x, preds, np.ones(len(data)))
    anchors = WeightedDataset(
        np.repeat(_x0_row(spec, x0), n_extra, axis=0),
        np.full(n_extra, float(c_target)),
        np.full(n_extra, 1.0 / n_extra),
    )
    return relabelled.concat(anchors)


def train_perturbed_pair(spec, base, data, head, config, x0, delta=1.0, freeze_variance=True):
    """Retrain the base network towards a large and a small value at ``x0``."""
    x0 = _x0_row(spec, x0)
    f_base = float(output_at(spec, base, head, x0)[0])
    if head.is_bernoulli:
        c_max, c_min = 1.0, 0.0
    else:
        if not delta > 0:
            raise DegenerateRequestError("delta must be positive for a gaussian head")
        c_max, c_min = f_base + delta, f_base - delta
    n_extra = n_extra_for(len(data), config.batch_size)
    if freeze_variance and head.kind == "mean_variance_gaussian":
        config = replace(config, freeze_variance=True)
    trained = {}
    for tag, target in (("plus", c_max), ("minus", c_min)):
        augmented = build_augmented_dataset(data, spec, base, head, x0, target, n_extra)
        trained[tag] = train(spec, base, augmented, head, config.with_seed(derive_seed(config.seed, tag)))
    f_plus = float(output_at(spec, trained["plus"], head, x0)[0])
    f_minus = float(output_at(spec, trained["minus"], head, x0)[0])
    diagnostics = []
    if f_plus <= f_base:
        diagnostics.append("plus-wrong-direction")
    if f_minus >= f_base:
        diagnostics.append("minus-wrong-direction")
    return PerturbedPair(base, trained["plus"], trained["minus"], f_base, f_plus, f_minus,
                         x0.reshape(-1), c_max, c_min, diagnostics)


class ProfileEvaluator:
    """Evaluates ``T(c)`` for one trained pair; network outputs are computed once."""

    def __init__(self, pair, data, spec, head, space="natural"):
        self.pair, self.head, self.space = pair, head, space
        self.y = data.y
        self.base = head.params_from_outputs(forward(spec, pair.base, data.x))
        self.plus = head.params_from_outputs(forward(spec, pair.plus, data.x))
        self.minus = head.params_from_outputs(forward(spec, pair.minus, data.x))
        self.ll_base = head.dataset_log_likelihood(self.base, self.y)
        self.negative_floored = 0

    def direction(self, c):
        """``(f_dir, perturbed params, name)`` for the side ``c`` lies on."""
        p = self.pair
        if c > p.f_base:
            f_dir, params, name = p.f_plus, self.plus, "plus"
            ok = f_dir > p.f_base
        else:
            f_dir, params, name = p.f_minus, self.minus, "minus"
            ok = f_dir < p.f_base
        if not ok:
            raise UnreachableDirectionError(
                f"{name} network moved the output from {p.f_base!r} to {f_dir!r}", direction=name)
        return f_dir, params, name

    def lam(self, c):
        if c == self.pair.f_base:
            return 0.0
        f_dir, _, _ = self.direction(c)
        return float(_heads.lambda_for_target(self.pair.f_base, f_dir, c, self.space))

    def c_at(self, lam, name):
        f_dir = self.pair.f_plus if name == "plus" else self.pair.f_minus
        f_base = self.pair.f_base
        if self.space == "logit" and self.head.is_bernoulli:
            zb, zd = (float(_heads._logit(_heads.clamp_prob(v))) for v in (f_base, f_dir))
            return float(sigmoid((1.0 - lam) * zb + lam * zd))
        return (1.0 - lam) * f_base + lam * f_dir

    def raw(self, c):
        """Unfloored statistic and the mixing weight used."""
        if c == self.pair.f_base:
            return 0.0, 0.0
        _, perturbed, _ = self.direction(c)
        lam = self.lam(c)
        mixed = _heads.combine_params(self.base, perturbed, lam, self.space)
        return 2.0 * (self.ll_base - self.head.dataset_log_likelihood(mixed, self.y)), lam

    def __call__(self, c):
        t, _ = self.raw(c)
        if t < 0.0:
            self.negative_floored += 1
            log.debug("negative statistic %.3g at c=%r floored to 0", t, c)
            return 0.0
        return t


def test_statistic(c, pair, data, spec, head, space="natural"):
    """Twice the log-likelihood ratio between the base fit and the mix passing through ``c``."""
    return ProfileEvaluator(pair, data, spec, head, space)(c)


def _search_direction(ev, name, threshold, options, tol, profile, diagnostics):
    p = ev.pair
    if ev.head.is_bernoulli and (
            (name == "plus" and p.f_base >= 1.0 - _heads.PROB_EPS)
            or (name == "minus" and p.f_base <= _heads.PROB_EPS)):
        # already saturated on this side; nothing left to search
        diagnostics.append(f"saturated-{name}")
        return p.f_base, 0.0
    f_dir = p.f_plus if name == "plus" else p.f_minus
    if (f_dir <= p.f_base) if name == "plus" else (f_dir >= p.f_base):
        raise UnreachableDirectionError(
            f"{name} network moved the output from {p.f_base!r} to {f_dir!r}", direction=name)
    lam_ext = options.lambda_max
    c_ext = ev.c_at(lam_ext, name)
    if ev.head.is_bernoulli and not 0.0 <= c_ext <= 1.0:
        c_ext = min(max(c_ext, 0.0), 1.0)
        lam_ext = ev.lam(c_ext)

    lams = np.linspace(0.0, lam_ext, options.grid_points)
    cs = [p.f_base] + [ev.c_at(l, name) for l in lams[1:]]
    if ev.head.is_bernoulli:
        cs[-1] = c_ext
    ts = [ev(c) for c in cs]
    profile.extend(zip(cs, ts))
    inside = [t <= threshold for t in ts]
    if sum(a != b for a, b in zip(inside, inside[1:])) > 1:
        diagnostics.append(f"nonmonotone-profile-{name}")

    if inside[-1]:
        diagnostics.append(f"endpoint-clamped-{name}")
        endpoint, lam_end = c_ext, lam_ext
    else:
        # outermost crossing: last grid point still inside
        k = max(i for i, ok in enumerate(inside) if ok)
        c_in, c_out = cs[k], cs[k + 1]
        for _ in range(options.max_iter):
            if abs(c_out - c_in) < tol:
                break
            mid = 0.5 * (c_in + c_out)
            t = ev(mid)
            profile.append((mid, t))
            if t <= threshold:
                c_in = mid
            else:
                c_out = mid
        endpoint, lam_end = c_in, ev.lam(c_in)
    if lam_end > 1.0:
        diagnostics.append(f"lambda-extrapolated-{name}")
    return endpoint, lam_end


def interval_from_pair(pair, alpha, data, spec, head, options=SearchOptions()):
    """Cut the likelihood-ratio profile of an already trained pair at the chi-square threshold."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    threshold = chi2_quantile(1.0 - alpha, options.dof)
    tol = options.tol
    if tol is None:
        tol = 1e-3 if head.is_bernoulli else 1e-3 * options.delta
    ev = ProfileEvaluator(pair, data, spec, head, options.space)
    profile, diagnostics = [(pair.f_base, 0.0)], list(pair.diagnostics)
    ends = {}
    for name in ("minus", "plus"):
        try:
            ends[name] = _search_direction(ev, name, threshold, options, tol, profile, diagnostics)
        except UnreachableDirectionError:
            if options.on_unreachable == "raise":
                raise
            diagnostics.append(f"unreachable-{name}")
            ends[name] = (pair.f_base, 0.0)
    if ev.negative_floored:
        diagnostics.append("negative-T-floored")
    lo, lam_lo = ends["minus"]
    hi, lam_hi = ends["plus"]
    profile = sorted(set((float(c), float(t)) for c, t in profile))
    return ConfidenceInterval(
        lo=float(lo), hi=float(hi), alpha=alpha, dof=options.dof,
        f_base=pair.f_base, f_plus=pair.f_plus, f_minus=pair.f_minus,
        x0=tuple(float(v) for v in pair.x0), lambda_at_endpoints=(lam_lo, lam_hi),
        profile=profile, diagnostics=sorted(set(diagnostics)),
    )


def confidence_interval(x0, alpha, data, spec, base, head, config, options=SearchOptions()):
    """Train the perturbed pair at ``x0`` and return the likelihood-ratio interval."""
    pair = train_perturbed_pair(spec, base, data, head, config, x0, options.delta, options.freeze_variance)
    return interval_from_pair(pair, alpha, data, spec, head, options)


# keep pytest from collecting the function when it is imported into a test module
test_statistic.__test__ = False
