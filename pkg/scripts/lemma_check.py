#!/usr/bin/env python3
"""Frequency of the two hard-instance lemmas: |V0| <= 2pn and OPT >= n/5."""

import argparse
import csv
import sys

from dmr.distributions import build_hard_instance, opt_size, v0_size
from dmr.seeding import derive_seed


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8192)
    ap.add_argument("--k", type=int, default=64)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--instances", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["instance", "seed", "v0", "v0_bound", "opt", "opt_bound"])
    v0_ok = opt_ok = 0
    for t in range(args.instances):
        seed = derive_seed(args.seed, t)
        inst = build_hard_instance(args.n, args.k, args.alpha, seed)
        v0, opt = v0_size(inst), opt_size(inst)
        v0_ok += v0 <= 2 * inst.p * inst.n
        opt_ok += 5 * opt >= inst.n
        writer.writerow([t, seed, v0, f"{2 * inst.p * inst.n:.1f}", opt, f"{inst.n / 5:.1f}"])
    frac = lambda c: c / args.instances  # noqa: E731
    print(f"|V0|<=2pn: {frac(v0_ok):.3f}  OPT>=n/5: {frac(opt_ok):.3f}", file=sys.stderr)
    return 0 if min(frac(v0_ok), frac(opt_ok)) >= 0.99 else 3


if __name__ == "__main__":
    sys.exit(main())
