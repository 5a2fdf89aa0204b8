#!/usr/bin/env python3
"""Sweep the block length k in the information experiment.

The mean observed information should track 2 (k+1)/k / theta0^2 for fixed k
and approach 2 / theta0^2 as k grows; the sweep makes the k-dependence
visible instead of asserting a single growth rule.

    python scripts/information_k_sweep.py --n 1024 --M 300
"""

import argparse
import os
import sys

from diffmeans.experiments import ExperimentConfig, run_information


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="sine_scale")
    parser.add_argument("--theta0", type=float, default=1.0)
    parser.add_argument("--n", type=int, default=1024)
    parser.add_argument("--M", type=int, default=300)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--k", type=int, nargs="+", default=[1, 2, 4, 8, 16, 32])
    args = parser.parse_args()

    print(f"model={args.model} theta0={args.theta0} n={args.n} M={args.M}")
    print(f"{'k':>4s} {'mean I':>9s} {'var N':>9s} {'2(k+1)/k/th0^2':>15s}")
    for k in args.k:
        cfg = ExperimentConfig(
            experiment="information", run_id=f"info_k{k}", model=args.model,
            theta0=args.theta0, n_list=(args.n,), k_rule=f"fixed:{k}",
            replications=args.M, seed=args.seed,
        )
        rep = run_information(cfg, workers=args.workers)
        by = {r.stat: r for r in rep.rows}
        limit = 2.0 * (k + 1) / k / args.theta0**2
        print(f"{k:4d} {by['mean_info_stat'].value:9.4f} "
              f"{by['var_score_stat'].value:9.4f} {limit:15.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
