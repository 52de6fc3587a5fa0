"""Monte-Carlo checks of the chi-square calibration of Gaussian-mean LR statistics."""

import argparse

from deeplr.harness.montecarlo import run_markov_mc, run_wilks_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for known in (True, False):
        for n in (5, 50):
            r = run_wilks_mc(args.reps, n, args.seed, known_sigma=known)
            label = "known" if known else "profiled"
            print(f"wilks  sigma {label:8s} n={n:3d}  KS {r.ks:.4f}  mean T {r.mean_t:.3f}")
    for alpha in (0.05, 0.5):
        r = run_markov_mc(2 * args.reps, 20, alpha, args.seed)
        print(f"markov alpha={alpha:<4}  rejection {r.rate:.4f}  bound {alpha + r.mc_tolerance:.4f}  "
              f"{'ok' if r.within_bound else 'EXCEEDED'}")


if __name__ == "__main__":
    main()
