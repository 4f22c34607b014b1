#!/usr/bin/env python3
"""Fit the two-step payload to C * (a^2 kn + an + k) * ceil(log2 n) over a grid.

Writes one CSV row per (n, k, alpha) cell with the measured mean payload,
the model value and their ratio, then prints the fitted constant.
"""

import argparse
import csv
import sys

from dmr.experiments import ExperimentConfig, cost_model, fit_twostep, run_experiment, summarize


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", default="2048,4096,8192")
    ap.add_argument("--ks", default="64,128,256")
    ap.add_argument("--alphas", default="0.03125,0.0625,0.125")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--tolerance", type=float, default=0.40)
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    cfg = ExperimentConfig(
        "twostep",
        tuple(int(x) for x in args.ns.split(",")),
        tuple(int(x) for x in args.ks.split(",")),
        tuple(float(x) for x in args.alphas.split(",")),
        trials=args.trials,
        seed=args.seed,
    )
    rows, _, skipped = run_experiment(cfg)
    for notice in skipped:
        print(f"warning: {notice}", file=sys.stderr)
    cells = summarize(rows)
    fit = fit_twostep(cells)

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "k", "alpha", "trials", "mean_payload", "model", "ratio", "deviation"])
    for cell, rho in zip(cells, fit.ratios):
        writer.writerow([cell.n, cell.k, cell.alpha, cell.trials, f"{cell.mean_payload:.1f}",
                         f"{cost_model(cell.n, cell.k, cell.alpha):.1f}", f"{rho:.4f}", f"{rho / fit.C - 1:+.4f}"])
    ok = fit.max_deviation <= args.tolerance
    print(f"C={fit.C:.3f} max_deviation={fit.max_deviation:.3f} {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 3


if __name__ == "__main__":
    sys.exit(main())
