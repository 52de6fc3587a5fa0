"""Two-moon classification: class-1 probability intervals on a 7x6 lattice."""

import argparse
import csv

from deeplr.harness.config import preset
from deeplr.harness.experiments import run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    path = run_experiment(preset("two-moon", seed=args.seed, output=args.out), workers=args.workers)
    print(f"{'x0':>6} {'x1':>6} {'p':>6} {'deeplr':>15} {'ensemble':>15}")
    for r in csv.DictReader(open(path)):
        f = {k: float(v) for k, v in r.items() if k != "flags"}
        print(f"{f['x0']:6.2f} {f['x1']:6.2f} {f['f_base']:6.3f} "
              f"[{f['lr_lo']:.2f}, {f['lr_hi']:.2f}]".ljust(37) + f"[{f['ens_lo']:.2f}, {f['ens_hi']:.2f}]")


if __name__ == "__main__":
    main()
