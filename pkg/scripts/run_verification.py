#!/usr/bin/env python3
"""Run the full acceptance-scale verification suite and write reports.

Equivalent to `diffmeans verify`, kept as a script for notebook-free use:

    python scripts/run_verification.py --out reports/full --workers 4
"""

import argparse
import json
import os
import sys
import time

from diffmeans.experiments import default_verify_configs, merge_reports, run_experiment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="reports/verification")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--experiment", default=None,
                        help="restrict to one experiment id (default: all)")
    args = parser.parse_args()

    configs = default_verify_configs(args.seed)
    if args.experiment:
        configs = [c for c in configs if c.experiment == args.experiment]
        if not configs:
            print(f"no default run for experiment {args.experiment!r}", file=sys.stderr)
            return 2

    reports = []
    for cfg in configs:
        t0 = time.perf_counter()
        rep = run_experiment(cfg, workers=args.workers)
        status = "ok" if rep.all_pass() else "FAIL"
        print(f"{cfg.run_id:28s} {time.perf_counter() - t0:6.1f}s  {status}")
        reports.append(rep)

    merged = merge_reports(reports)
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out + ".csv", "w") as f:
        f.write(merged.to_csv_text())
    with open(args.out + ".json", "w") as f:
        json.dump(merged.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    n_fail = sum(not r.passed for r in merged.rows)
    print(f"\n{len(merged.rows)} statistics, {n_fail} failed -> {args.out}.csv")
    return 0 if n_fail == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
