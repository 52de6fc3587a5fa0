"""Toy regression: DeepLR and ensemble intervals on a 41-point grid over [-1, 1].

Also prints the width and asymmetry summary for several seeds.
"""

import argparse
import math

import numpy as np

from deeplr.harness.config import preset
from deeplr.harness.experiments import deeplr_interval, fit_base, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    path = run_experiment(preset("toy-regression", output=args.out), workers=args.workers)
    print(f"grid results: {path}")

    for seed in range(args.seeds):
        fitted = fit_base(preset("toy-regression", seed=seed))
        gap = np.mean([deeplr_interval(fitted, [x]).width for x in (-0.05, 0.0, 0.05)])
        data = np.mean([deeplr_interval(fitted, [x]).width for x in (-0.6, 0.6)])
        c = deeplr_interval(fitted, [0.0])
        asym = math.log((c.hi - c.f_base) / (c.f_base - c.lo)) if c.hi > c.f_base > c.lo else math.nan
        print(f"seed {seed}: gap width {gap:.3f}  data width {data:.3f}  "
              f"ratio {gap / data:.2f}  log-asymmetry at 0 {asym:+.2f}")


if __name__ == "__main__":
    main()
