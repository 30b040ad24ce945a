"""Command-line entry point: run, verify, compare, project."""

import argparse
import json
import os
import sys

from cliptrack import kernels
from cliptrack.errors import ConfigError, InvariantViolation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser():
    parser = _Parser(prog="cliptrack", description="Tracking-regret learners on the clipped simplex.")
    parser.add_argument("--backend", action="store_true", help="print the kernel backend and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--verify", action="store_true", help="enable per-step lemma assertions")
        p.add_argument("--seed", type=_seed, help="override the environment seed")
        p.add_argument("--format", choices=("csv", "json"), help="trace format")
        p.add_argument("--workers", type=int, help="threads used across learners")

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    common(run)

    verify = sub.add_parser("verify", help="run the randomized property suite")
    verify.add_argument("--seed", type=_seed, default=0)
    verify.add_argument("--quick", action="store_true", help="tenfold smaller samples")

    compare = sub.add_parser("compare", help="bound-vs-regret table across learners")
    compare.add_argument("config")
    compare.add_argument("--rerun", action="store_true", help="ignore existing reports.json")
    common(compare)

    project = sub.add_parser("project", help="one-shot clipped-simplex projection")
    project.add_argument("p", nargs="+", type=float)
    project.add_argument("--floor", type=float, required=True)
    return parser


def _load(args):
    from cliptrack.harness import ExperimentConfig, load_config

    config = load_config(args.config)
    changes = {}
    if args.out:
        changes["output_dir"] = args.out
    if args.verify:
        changes["verify"] = True
    if args.format:
        changes["format"] = args.format
    if args.workers is not None:
        changes["workers"] = args.workers
    env = config.environment if args.seed is None else config.environment.with_seed(args.seed)
    if changes or args.seed is not None:
        fields = dict(config.__dict__, environment=env, **changes)
        config = ExperimentConfig(**fields)
    return config


def cmd_run(args):
    from cliptrack.harness import run_experiment, summary_table

    config = _load(args)
    result = run_experiment(config)
    print(summary_table(result.reports))
    print(f"wrote traces and reports.json to {config.output_dir}")
    return EXIT_OK if result.all_passed else EXIT_INVARIANT


def cmd_compare(args):
    from cliptrack.harness import run_experiment, summary_table

    config = _load(args)
    path = os.path.join(config.output_dir, "reports.json")
    if os.path.exists(path) and not args.rerun:
        with open(path) as fh:
            reports = json.load(fh)
    else:
        reports = [r.to_dict() for r in run_experiment(config).reports]
    print(summary_table(reports))
    return EXIT_OK if all(r["pass"] for r in reports) else EXIT_INVARIANT


def cmd_verify(args):
    from cliptrack.selfcheck import run_all

    results = run_all(seed=args.seed, quick=args.quick)
    for r in results:
        print(r.line())
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed (backend: {kernels.BACKEND})")
    return EXIT_OK if failed == 0 else EXIT_INVARIANT


def cmd_project(args):
    from cliptrack.projections import kl_project_clipped

    result = kl_project_clipped(args.p, args.floor)
    print("(" + ", ".join(f"{x:.6g}" for x in result.point) + ")")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "verify": cmd_verify, "project": cmd_project}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        print(kernels.BACKEND)
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, InvariantViolation, ArithmeticError) as exc:
        if args.command == "project":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
