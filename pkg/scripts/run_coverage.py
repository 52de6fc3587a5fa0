"""Empirical coverage of DeepLR intervals on the toy regression at in-data points."""

import argparse
import json

from deeplr.harness.config import preset
from deeplr.harness.experiments import run_coverage


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--lambda-max", type=float, default=10.0)
    ap.add_argument("--grid", type=float, nargs="+", default=[-0.6, 0.6])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = preset("coverage", alpha=args.alpha, lambda_max=args.lambda_max, grid=[[g] for g in args.grid])
    report = run_coverage(cfg, args.reps, workers=args.workers)
    print(json.dumps(report.to_dict(), indent=2))


if __name__ == "__main__":
    main()
