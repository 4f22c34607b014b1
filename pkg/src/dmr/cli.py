"""``dmr`` command line: gen, run, experiment, verify, reduce.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 failed check.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import instance_io
from .experiments import (
    ExperimentConfig,
    checks_failed,
    cost_model,
    fit_twostep,
    hard_header,
    hard_partition,
    protocol_params,
    random_instance,
    result_row,
    run_experiment,
    summarize,
    verify_instance,
    write_rows,
)
from .protocols import PROTOCOLS, get_protocol
from .reduction import run_reduction_trials
from .simulator import run_protocol

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def cmd_gen(args) -> int:
    if args.type == "hard":
        if args.alpha is None:
            raise UsageError("gen --type hard requires --alpha")
        partition, inst = hard_partition(args.n, args.k, args.alpha, args.seed)
        header = hard_header(inst)
    else:
        partition = random_instance(args.n, args.k, args.density, args.seed)
        header = None
    out, close = _open_out(args.out)
    try:
        instance_io.write_instance(out, partition, header)
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_run(args) -> int:
    partition, _ = instance_io.load(args.input)
    graph = partition.graph
    params = protocol_params(args.protocol, args.alpha)
    run = run_protocol(get_protocol(args.protocol), graph, partition, params, args.seed)
    row = result_row(run, graph, partition.k, args.alpha, 0, args.seed)
    out, close = _open_out(args.csv)
    try:
        write_rows(out, [row])
    finally:
        if close:
            out.close()
    if args.transcript:
        with open(args.transcript, "w", newline="\n") as fh:
            fh.write(run.dump_transcript())
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig(
        protocol=args.protocol,
        ns=args.ns,
        ks=args.ks,
        alphas=args.alphas,
        trials=args.trials,
        seed=args.seed,
        out=args.out,
        instance=args.instance,
        density=args.density,
    )
    rows, _, skipped = run_experiment(cfg)
    for notice in skipped:
        print(f"warning: {notice}", file=sys.stderr)
    out, close = _open_out(cfg.out)
    try:
        write_rows(out, rows)
    finally:
        if close:
            out.close()
    if args.summary:
        report = sys.stderr if not close else sys.stdout
        summaries = summarize(rows)
        print("protocol n k alpha trials mean_payload median_payload mean_ratio min_ratio mean_rounds model", file=report)
        for s in summaries:
            model = f"{cost_model(s.n, s.k, s.alpha):.0f}" if s.alpha is not None else "-"
            print(
                f"{s.protocol} {s.n} {s.k} {s.alpha} {s.trials} {s.mean_payload:.1f} {s.median_payload:.1f} "
                f"{s.mean_ratio:.4f} {s.min_ratio:.4f} {s.mean_rounds:.2f} {model}",
                file=report,
            )
        if cfg.protocol == "twostep" and summaries:
            fit = fit_twostep(summaries)
            status = "PASS" if fit.max_deviation <= 0.40 else "FAIL"
            print(f"fit: payload_bits ~= C*(a^2 kn + an + k)*ceil(log2 n), C={fit.C:.3f}, max deviation={fit.max_deviation:.3f} [{status} at 0.40]", file=report)
    return EXIT_OK


def cmd_verify(args) -> int:
    partition, hard = instance_io.load(args.input)
    checks = verify_instance(partition, hard)
    out, close = _open_out(args.out)
    try:
        for check in checks:
            print(check.line(), file=out)
    finally:
        if close:
            out.close()
    return EXIT_CHECK if checks_failed(checks) else EXIT_OK


def cmd_reduce(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    s = run_reduction_trials(args.n, args.k, args.alpha, args.trials, args.seed, args.protocol)
    rate = f"{s.hit_rate:.4f}" if s.disj1 else "nan"
    out, close = _open_out(args.out)
    try:
        print("trials disj1 hits hit_rate threshold sigma disj0 false_positives one_sided hit_rate_check", file=out)
        print(
            f"{s.trials} {s.disj1} {s.hits} {rate} {s.threshold:.4f} {s.sigma:.4f} {s.disj0} {s.false_positives} "
            f"{'PASS' if s.one_sided_ok else 'FAIL'} {'PASS' if s.hit_rate_ok else 'FAIL'}",
            file=out,
        )
    finally:
        if close:
            out.close()
    return EXIT_OK if s.one_sided_ok and s.hit_rate_ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmr", description="Distributed matching in the coordinator model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    shared = _Parser(add_help=False)
    shared.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen", parents=[shared], help="generate an instance file")
    p.add_argument("--type", choices=("hard", "random"), default="hard")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--density", type=float, default=0.01)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", parents=[shared], help="run one protocol on an instance file")
    p.add_argument("--protocol", choices=sorted(PROTOCOLS), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--csv", "--out", dest="csv")
    p.add_argument("--transcript", help="write '<round> <dir> <site> <kind> <payload_bits>' lines here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", parents=[shared], help="sweep (n, k, alpha) cells")
    p.add_argument("--protocol", choices=sorted(PROTOCOLS), required=True)
    p.add_argument("--ns", type=_int_list, required=True)
    p.add_argument("--ks", type=_int_list, required=True)
    p.add_argument("--alphas", type=_float_list, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--instance", choices=("hard", "random"), default="hard")
    p.add_argument("--density", type=float, default=0.01)
    p.add_argument("--out")
    p.add_argument("--summary", action="store_true", help="print per-cell summaries and the fitted cost constant")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="check the invariants of an instance file")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", parents=[shared], help="DISJ-from-matching demonstration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--protocol", choices=sorted(PROTOCOLS), default="twostep")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except instance_io.ParseError as exc:
        print(f"dmr: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, ValueError) as exc:
        print(f"dmr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"dmr: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
