"""Exit criteria of the build, one PASS/FAIL line each in the terminal summary."""

import math
from dataclasses import replace

import numpy as np
import pytest

from deeplr.baselines import ensemble_interval, train_ensemble
from deeplr.heads import Head
from deeplr.intervals import (
    SearchOptions,
    interval_from_pair,
    test_statistic as lr_statistic,
    train_perturbed_pair,
)
from deeplr.harness.config import preset
from deeplr.harness.experiments import deeplr_interval, fit_base, run_coverage
from deeplr.harness.montecarlo import run_markov_mc, run_wilks_mc
from deeplr.stats import chi2_cdf, chi2_quantile, gaussian_mean_lr_interval, normal_cdf

import oracles
from gradcheck import max_gradient_error
from test_intervals import BIAS_SPEC, UNIT, bias_data, bias_pair

pytestmark = pytest.mark.acceptance

HEADS = ("homoscedastic_gaussian", "mean_variance_gaussian", "bernoulli_logit")


def check(acceptance, criterion, ok, detail):
    acceptance(criterion, ok, detail)
    assert ok, f"{criterion}: {detail}"


def test_c01_gradient_correctness(acceptance):
    errs = {k: max_gradient_error(k, draws=10, seed=2024) for k in HEADS}
    detail = ", ".join(f"{k}={v:.2e}" for k, v in errs.items())
    check(acceptance, "C1 gradient check", max(errs.values()) < 1e-5, detail)


def test_c02_special_functions(acceptance):
    errs = [abs(chi2_quantile(0.95, 2) + 2 * math.log(0.05))]
    for x in np.linspace(0.0, 20.0, 201):
        errs.append(abs(chi2_cdf(x, 1) - (2 * normal_cdf(math.sqrt(x)) - 1)))
    for k in (1, 2, 3, 5):
        for p in np.linspace(0.01, 0.99, 99):
            errs.append(abs(chi2_cdf(chi2_quantile(p, k), k) - p))
    check(acceptance, "C2 special functions", max(errs) < 1e-8, f"max error {max(errs):.2e}")


def test_c03_oracle_equivalence(acceptance):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 60))
        y = rng.normal(rng.normal(), rng.uniform(0.1, 3.0), n)
        alpha = float(rng.uniform(0.01, 0.5))
        z = oracles.normal_quantile_bisect(1 - alpha / 2)
        half = z * float(np.std(y, ddof=1)) / math.sqrt(n)
        res = gaussian_mean_lr_interval(y.tolist(), alpha)
        worst = max(worst, abs(res.lo - (y.mean() - half)), abs(res.hi - (y.mean() + half)))
    t_worst = 0.0
    for _ in range(100):
        y = rng.normal(size=int(rng.integers(2, 50)))
        c = float(y.mean() + rng.normal())
        t = lr_statistic(c, bias_pair(y), bias_data(y), BIAS_SPEC, UNIT)
        t_worst = max(t_worst, abs(t - len(y) * (y.mean() - c) ** 2))
    ok = worst < 1e-9 and t_worst < 1e-6
    check(acceptance, "C3 oracle equivalence", ok, f"interval {worst:.1e}, bias-only T {t_worst:.1e}")


def test_c04_wilks(acceptance):
    rep = run_wilks_mc(10_000, 50, seed=0)
    check(acceptance, "C4 Wilks Monte-Carlo", rep.ks < 0.02, f"KS {rep.ks:.4f}, mean T {rep.mean_t:.3f}")


def test_c05_markov_bound(acceptance):
    reps = [run_markov_mc(20_000, 20, alpha=a, seed=1) for a in (0.05, 0.5)]
    detail = ", ".join(f"alpha={r.alpha}: rate {r.rate:.4f} (bound {r.alpha + r.mc_tolerance:.4f})" for r in reps)
    check(acceptance, "C5 Markov bound", all(r.within_bound for r in reps), detail)


def _structural_run(seed=0):
    cfg = preset("toy-regression", seed=seed)
    fitted = fit_base(cfg)
    head = cfg.head_obj
    pair = train_perturbed_pair(cfg.spec, fitted.base, fitted.data, head, fitted.config.train, [0.0])
    runs = {(a, d): interval_from_pair(pair, a, fitted.data, cfg.spec, head, replace(cfg.search_options, dof=d))
            for a in (0.05, 0.10) for d in (1, 2)}
    return fitted, pair, runs


@pytest.fixture(scope="module")
def structural():
    return _structural_run()


def _contains(outer, inner):
    return outer.lo <= inner.lo and inner.hi <= outer.hi


def test_c06_structural_invariants(acceptance, structural):
    fitted, pair, runs = structural
    cfg = fitted.config
    t0 = lr_statistic(pair.f_base, pair, fitted.data, cfg.spec, cfg.head_obj)
    base_ci = runs[0.05, 1]
    checks = {
        "T(f_base)=0": t0 == 0.0,
        "contains f_base": all(ci.lo <= ci.f_base <= ci.hi for ci in runs.values()),
        "dof2>=dof1": all(_contains(runs[a, 2], runs[a, 1]) for a in (0.05, 0.10)),
        "a.05>=a.10": all(_contains(runs[0.05, d], runs[0.10, d]) for d in (1, 2)),
    }
    detail = f"standardized [{base_ci.lo:.4f}, {base_ci.hi:.4f}] f_base {base_ci.f_base:.4f}; " + \
        ", ".join(f"{k} {'ok' if v else 'BROKEN'}" for k, v in checks.items())
    check(acceptance, "C6 structural invariants", all(checks.values()), detail)


def test_c07_toy_regression_shape(acceptance):
    gap, data_pts = (-0.05, 0.0, 0.05), (-0.6, 0.6)
    gap_w, data_w, asym = [], [], []
    for seed in range(5):
        fitted = fit_base(preset("toy-regression", seed=seed))
        cis = {x: deeplr_interval(fitted, [x]) for x in gap + data_pts}
        gap_w += [cis[x].width for x in gap]
        data_w += [cis[x].width for x in data_pts]
        c = cis[0.0]
        up, down = c.hi - c.f_base, c.f_base - c.lo
        asym.append(abs(math.log(up / down)) if up > 0 and down > 0 else math.inf)
    ratio = np.mean(gap_w) / np.mean(data_w)
    n_asym = sum(a > 0.2 for a in asym)
    detail = (f"gap width {np.mean(gap_w):.3f}, data width {np.mean(data_w):.3f}, ratio {ratio:.2f}; "
              f"asymmetric at x=0 in {n_asym}/5 ({', '.join(f'{a:.2f}' for a in asym)})")
    check(acceptance, "C7 toy regression widths/asymmetry", ratio >= 2.0 and n_asym >= 3, detail)


# probe points chosen before looking at any intervals: well outside both moons
FAR_PROBES = [(-2.5, 2.5), (3.5, -2.0), (-2.5, -1.5), (3.5, 2.5), (0.5, 3.5), (0.5, -3.0)]


def _arc_index(t, n_half=40):
    return int(round(t / math.pi * (n_half - 1)))


# interior arc points: pi/4, pi/2, 3pi/4 on the first moon, pi/3, 2pi/3 on the second
TRAIN_INDICES = [_arc_index(math.pi / 4), _arc_index(math.pi / 2), _arc_index(3 * math.pi / 4),
                 40 + _arc_index(math.pi / 3), 40 + _arc_index(2 * math.pi / 3)]


def test_c08_two_moon(acceptance):
    cfg = preset("two-moon", seed=0)
    fitted = fit_base(cfg)
    head = cfg.head_obj
    dists = [float(np.min(np.linalg.norm(fitted.data.x - np.array(p), axis=1))) for p in FAR_PROBES]
    assert min(dists) >= 2.0
    far = [deeplr_interval(fitted, p).width for p in FAR_PROBES]
    near = [deeplr_interval(fitted, fitted.data.x[i]).width for i in TRAIN_INDICES]
    ens = train_ensemble(cfg.spec, fitted.data, head, fitted.config.train, cfg.ensemble_size)
    ens_far = [ensemble_interval(ens, p, cfg.alpha, head).width for p in FAR_PROBES]
    ok = min(far) >= 0.9 and max(near) <= 0.5 and all(e <= d for e, d in zip(ens_far, far))
    fmt = lambda v: ", ".join(f"{w:.3f}" for w in v)
    detail = f"far DeepLR [{fmt(far)}]; train-point DeepLR [{fmt(near)}]; far ensemble [{fmt(ens_far)}]"
    check(acceptance, "C8 two-moon", ok, detail)


@pytest.mark.slow
def test_c09_coverage(acceptance):
    rep = run_coverage(preset("coverage", seed=0), 20)
    detail = (f"coverage {rep.coverage:.3f} over {rep.replications} reps "
              f"(per point {', '.join(f'{c:.2f}' for c in rep.point_coverage)}), failures {rep.failures}")
    check(acceptance, "C9 coverage", rep.coverage >= 0.70, detail)


def test_c10_determinism(acceptance, structural):
    _, _, first = structural
    _, _, second = _structural_run()
    same = all(first[k].to_json() == second[k].to_json() for k in first)
    check(acceptance, "C10 determinism", same, "interval JSON identical across reruns" if same else "JSON differs")
