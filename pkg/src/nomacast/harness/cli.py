"""Command line entry point.

    nomacast run <config.ini> [--trials N] [--seed S] [--out DIR] [--jobs J] [--tol T]
    nomacast replicate <fig_id> [same flags]
    nomacast selftest

Exit codes: 0 success, 2 configuration error, 3 when any row reports a
numerical failure, 1 when the self test fails.
"""
import argparse
import sys

from .config import ConfigError, load
from .figures import FIGURE_IDS, replicate_figure
from .output import write_outputs
from .runner import run_trials

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _common(p):
    p.add_argument("--trials", type=int, help="number of channel realizations")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--tol", type=float, help="MM relative-change tolerance")


def build_parser():
    parser = argparse.ArgumentParser(prog="nomacast", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("config")
    _common(p_run)
    p_rep = sub.add_parser("replicate", help="run the prebaked config of a figure")
    p_rep.add_argument("fig_id", help=f"one of {', '.join(FIGURE_IDS)}")
    _common(p_rep)
    sub.add_parser("selftest", help="quick consistency checks against closed forms")
    return parser


def _execute(cfg, args):
    records = run_trials(cfg, jobs=args.jobs)
    paths = write_outputs(cfg, records)
    with open(paths["summary"]) as fh:
        sys.stdout.write(fh.read())
    for key in ("raw", "aggregate", "timing"):
        print(f"{key}: {paths[key]}")
    return EXIT_NUMERICAL if any(r.status == "failed" for r in records) else EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        from .selftest import run_selftest
        return EXIT_OK if run_selftest() else EXIT_SELFTEST
    try:
        if args.command == "run":
            cfg = load(args.config)
        else:
            cfg = replicate_figure(args.fig_id)
        cfg = cfg.with_overrides(trials=args.trials, seed=args.seed, out=args.out,
                                 mm_tol=args.tol)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _execute(cfg, args)


if __name__ == "__main__":
    sys.exit(main())
