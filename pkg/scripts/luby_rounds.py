#!/usr/bin/env python3
"""Luby iteration counts on random graphs, against the 4 log2 n budget."""

import argparse
import csv
import math
import statistics
import sys

from dmr.experiments import random_instance
from dmr.protocols import luby_distributed


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="256,1024,4096")
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--degree", type=float, default=8.0, help="expected left degree")
    ap.add_argument("--seeds", type=int, default=50)
    args = ap.parse_args(argv)

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "seed", "edges", "iterations", "rounds", "matching_size"])
    ok = True
    for n in (int(x) for x in args.ns.split(",")):
        iters = []
        for s in range(args.seeds):
            part = random_instance(n, args.k, 2 * args.degree / n, seed=s)
            run = luby_distributed(part.graph, part, seed=s)
            iters.append(run.stats["iterations"])
            writer.writerow([n, s, part.graph.m, iters[-1], run.ledger.rounds, len(run.output)])
        med, budget = statistics.median(iters), 4 * math.log2(n)
        ok &= med <= budget
        print(f"n={n}: median {med} max {max(iters)} budget {budget:.0f}", file=sys.stderr)
    return 0 if ok else 3


if __name__ == "__main__":
    sys.exit(main())
