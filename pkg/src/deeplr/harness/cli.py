"""Command-line entry point: ``python -m deeplr <subcommand>``."""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from ..dataset import WeightedDataset
from ..heads import Head
from ..intervals import SearchOptions, confidence_interval
from ..mlp import init_params, load_checkpoint, save_checkpoint
from ..optim import TrainConfig, train
from .config import ExperimentConfig, preset
from .experiments import Normalizer, make_dataset, run_coverage, run_experiment
from .montecarlo import run_markov_mc, run_wilks_mc

TASKS = ("toy-regression", "toy-classification", "two-moon")


def _emit(doc, out=None, name=None):
    text = json.dumps(doc, indent=2)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, name), "w") as fh:
            fh.write(text + "\n")
    print(text)


def _load_config(args, name):
    cfg = ExperimentConfig.load(args.config) if args.config else preset(name)
    overrides = {}
    for key in ("seed", "alpha", "dof", "delta", "lambda_max"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "out", None):
        overrides["output"] = args.out
    return replace(cfg, **overrides)


def cmd_gen(args):
    cfg = replace(preset(args.task), seed=args.seed if args.seed is not None else 0)
    if args.n is not None:
        cfg = replace(cfg, n=args.n)
    if args.noise_sd is not None:
        cfg = replace(cfg, noise_sd=args.noise_sd)
    data = make_dataset(cfg)
    path = args.out or f"{args.task}.csv"
    data.to_csv(path)
    _emit({"path": path, "records": len(data)})


def cmd_train(args):
    cfg = _load_config(args, args.preset)
    data = WeightedDataset.from_csv(args.data)
    norm = Normalizer.fit(data.y) if cfg.normalize_targets else Normalizer()
    data = data.with_targets(norm.apply(data.y))
    train_cfg = cfg.train.with_seed(cfg.seed)
    params = train(cfg.spec, init_params(cfg.spec, cfg.seed), data, cfg.head_obj, train_cfg)
    meta = {"head": cfg.head, "train": train_cfg.to_dict(),
            "normalization": {"mean": norm.mean, "scale": norm.scale}}
    path = args.checkpoint
    save_checkpoint(path, cfg.spec, params, meta)
    _emit({"checkpoint": path, "n_params": int(params.size)})


def cmd_ci(args):
    spec, params, meta = load_checkpoint(args.checkpoint)
    head = Head(meta["head"])
    train_cfg = TrainConfig.from_dict(meta["train"])
    norm = Normalizer(**meta.get("normalization", {}))
    data = WeightedDataset.from_csv(args.data)
    data = data.with_targets(norm.apply(data.y))
    opts = SearchOptions(dof=args.dof or 1, delta=args.delta or 1.0,
                         lambda_max=args.lambda_max or SearchOptions.lambda_max,
                         on_unreachable="collapse")
    ci = confidence_interval(np.array(args.x0, dtype=float), args.alpha or 0.05, data, spec,
                             params, head, train_cfg, opts)
    _emit(norm.invert_interval(ci).to_dict(), args.out, "interval.json")


def cmd_experiment(args):
    cfg = _load_config(args, args.preset)
    path = run_experiment(cfg, workers=args.workers)
    _emit({"csv": path, "config_hash": cfg.config_hash()})


def cmd_coverage(args):
    cfg = _load_config(args, "coverage")
    if args.grid:
        cfg = replace(cfg, grid=[[g] for g in args.grid])
    report = run_coverage(cfg, args.reps, workers=args.workers)
    _emit(report.to_dict(), args.out, "coverage.json")


def cmd_wilks(args):
    rep = run_wilks_mc(args.reps, args.n, args.seed or 0, known_sigma=not args.unknown_sigma)
    _emit(rep.to_dict(), args.out, "wilks_mc.json")


def cmd_markov(args):
    rep = run_markov_mc(args.reps, args.n, args.alpha or 0.05, args.seed or 0)
    _emit(rep.to_dict(), args.out, "markov_mc.json")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--dof", type=int, choices=(1, 2))
    common.add_argument("--delta", type=float)
    common.add_argument("--lambda-max", dest="lambda_max", type=float)
    common.add_argument("--out")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--config", help="experiment configuration JSON")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="deeplr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a synthetic dataset CSV")
    p.add_argument("task", choices=TASKS)
    p.add_argument("--n", type=int)
    p.add_argument("--noise-sd", dest="noise_sd", type=float)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", parents=[common], help="train a base network on a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--preset", default="toy-regression", choices=TASKS)
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ci", parents=[common], help="likelihood-ratio interval at one input")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--x0", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("experiment", parents=[common], help="DeepLR and ensemble intervals over a preset grid")
    p.add_argument("preset", choices=TASKS)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("coverage", parents=[common], help="Monte-Carlo coverage of the toy regression")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--grid", type=float, nargs="+")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("wilks-mc", parents=[common], help="LR statistic vs chi-square(1)")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--unknown-sigma", action="store_true")
    p.set_defaults(func=cmd_wilks)

    p = sub.add_parser("markov-mc", parents=[common], help="rejection rate of the chi-square(2) cut")
    p.add_argument("--reps", type=int, default=20_000)
    p.add_argument("--n", type=int, default=20)
    p.set_defaults(func=cmd_markov)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except Exception as err:
        json.dump({"error": type(err).__name__, "message": str(err)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0
