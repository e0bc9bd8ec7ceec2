"""BwK lab command line: inspect, simulate, sweep, lp.

Exit codes: 0 command completed (an infeasible LP is an answer), 1 usage or
config error, 2 internal invariant violation.
"""

import argparse
import logging
import os
import sys

from src.config.constants import DEFAULT_C1, DEFAULT_C2, DEFAULT_EPS_LP, RESOURCES_DIR
from src.utils.errors import BwkError, InvariantViolation
from src.utils.logging import log_error

DEFAULT_CONFIG = os.path.join(RESOURCES_DIR, "configs", "canonical_k.json")
OVERRIDE_FLAGS = {
    "c1": "c1",
    "c2": "c2",
    "eps_lp": "eps_lp",
    "mw_eps": "mw_eps_override",
    "backend": "estimator_backend",
    "lp_mode": "lp_mode",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_run_overrides(parser):
    group = parser.add_argument_group("algorithm overrides (applied to every configured algorithm)")
    group.add_argument("--c1", type=float, default=None, help=f"univariate QMC constant (default {DEFAULT_C1})")
    group.add_argument("--c2", type=float, default=None, help=f"multivariate QMC constant (default {DEFAULT_C2})")
    group.add_argument("--eps-lp", dest="eps_lp", type=float, default=None, help=f"LP accuracy (default {DEFAULT_EPS_LP})")
    group.add_argument(
        "--mw-eps", dest="mw_eps", type=float, default=None, help="weight-update rate (default sqrt(ln d / B))"
    )
    group.add_argument(
        "--backend",
        choices=["idealized", "ae-analytic", "classical"],
        default=None,
        help="quantum estimator backend (default idealized)",
    )
    group.add_argument(
        "--lp-mode", dest="lp_mode", choices=["exact", "approx"], default=None, help="LP solver mode (default exact)"
    )


def build_parser():
    parser = _Parser(prog="bwk", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    inspect = sub.add_parser("inspect", help="ground truth and derived constants")
    inspect.add_argument("--config", default=DEFAULT_CONFIG, help="experiment config, .json or .toml (default: %(default)s)")
    inspect.add_argument("--t", type=int, default=None, help="horizon override")
    inspect.add_argument("--seed", type=int, default=None, help="instance generator seed override")

    simulate = sub.add_parser("simulate", help="one seeded replication")
    simulate.add_argument("--config", default=DEFAULT_CONFIG, help="experiment config, .json or .toml (default: %(default)s)")
    simulate.add_argument("--algo", default=None, help="algorithm or label (default: first configured)")
    simulate.add_argument("--t", type=int, default=None, help="horizon override")
    simulate.add_argument("--seed", type=int, default=None, help="run seed (default: experiment.seed)")
    simulate.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    _add_run_overrides(simulate)

    sweep = sub.add_parser("sweep", help="T-sweep with replications")
    sweep.add_argument("--config", default=DEFAULT_CONFIG, help="experiment config, .json or .toml (default: %(default)s)")
    sweep.add_argument("--seed", type=int, default=None, help="base seed (default: experiment.seed)")
    sweep.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    sweep.add_argument("--dry-run", action="store_true", help="print the planned cells and write nothing")
    sweep.add_argument("--threads", type=int, default=None, help="worker threads (default: BWK_THREADS or 1)")
    _add_run_overrides(sweep)

    lp = sub.add_parser("lp", help="solve an LP file", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    lp.add_argument("--file", required=True, help="LP JSON {objective, A, rhs, pins?, geq_A?, geq_rhs?, scale?}")
    lp.add_argument("--mode", choices=["exact", "approx"], default="exact", help="solver")
    lp.add_argument("--eps", type=float, default=DEFAULT_EPS_LP, help="scaled accuracy for --mode approx")
    lp.add_argument("--seed", type=int, default=None, help="accepted for uniformity; the solvers are deterministic")
    return parser


def _apply_overrides(config, args):
    overrides = {
        field: getattr(args, flag) for flag, field in OVERRIDE_FLAGS.items() if getattr(args, flag, None) is not None
    }
    if overrides:
        config.overrides = overrides
        config.algorithms = [{**entry, **overrides} for entry in config.algorithms]
    return config


def run(args) -> int:
    from src.cli.commands import cmd_inspect, cmd_lp, cmd_simulate, cmd_sweep
    from src.cli.config_schema import load_config

    if args.command == "lp":
        return cmd_lp(args.file, mode=args.mode, eps=args.eps)

    config = _apply_overrides(load_config(args.config), args)
    if args.command == "inspect":
        if args.seed is not None:
            config.instance["seed"] = args.seed
        return cmd_inspect(config, T=args.t)
    if args.command == "simulate":
        return cmd_simulate(config, algo=args.algo, T=args.t, seed=args.seed, out_dir=args.out)
    if args.seed is not None:
        config.seed = args.seed
    return cmd_sweep(config, dry_run=args.dry_run, out_dir=args.out, threads=args.threads)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except InvariantViolation as e:
        log_error(e, context=f"cli.{args.command}")
        print(f"invariant violation: {e}", file=sys.stderr)
        return 2
    except BwkError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
