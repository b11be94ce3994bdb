import argparse
import logging
import multiprocessing
import sys

from Cli import commands
from Common.errors import ConfigError, InputFileError, NoFeasibleSolutionError
from Common.logSetup import configure_logging

logger = logging.getLogger("main")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_NO_FEASIBLE = 3


def _weights(text):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"weights must be comma separated numbers, got {text!r}")
    if len(values) != 3:
        raise argparse.ArgumentTypeError("need exactly three weights (of1,of2,of3)")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="sensor-placement",
                                     description="Secure ADS-B sensor placement with NSGA-II")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--out", default=None, help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (overrides the config)")

    p = sub.add_parser("optimize", help="place sensors on an empty area")
    common(p)
    p.add_argument("--threads", type=int, default=None, help="evaluation worker processes")

    p = sub.add_parser("augment", help="add sensors to a deployed set")
    common(p)
    p.add_argument("--sensors", required=True, help="deployed sensors CSV (id,lat_deg,lon_deg,alt_m)")
    p.add_argument("--threads", type=int, default=None, help="evaluation worker processes")

    p = sub.add_parser("evaluate", help="score a sensor list")
    common(p)
    p.add_argument("--sensors", required=True, help="sensors CSV (id,lat_deg,lon_deg,alt_m)")

    p = sub.add_parser("report", help="summarize a Pareto front and pick a solution")
    p.add_argument("--out", required=True, help="directory holding pareto.csv")
    p.add_argument("--budget", type=int, default=None, help="maximum number of sensors")
    p.add_argument("--weights", type=_weights, default=(1 / 3, 1 / 3, 1 / 3), help="of1,of2,of3 weights")
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    configure_logging()
    try:
        if args.command == "optimize":
            commands.cmd_optimize(args.config, args.out, args.seed, args.threads, progress=sys.stderr)
        elif args.command == "augment":
            commands.cmd_augment(args.config, args.sensors, args.out, args.seed, args.threads, progress=sys.stderr)
        elif args.command == "evaluate":
            commands.cmd_evaluate(args.config, args.sensors, args.out, args.seed)
        elif args.command == "report":
            commands.cmd_report(args.out, args.budget, args.weights)
    except (ConfigError, InputFileError, FileNotFoundError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except NoFeasibleSolutionError as exc:
        logger.error("no feasible solution: %s", exc)
        return EXIT_NO_FEASIBLE
    except Exception as exc:
        logger.error("run failed: %s", exc)
        logger.debug("traceback", exc_info=True)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    # Required for Windows to properly handle multiprocessing
    multiprocessing.freeze_support()
    sys.exit(run())
