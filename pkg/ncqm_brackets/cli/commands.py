import argparse
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .. import ARTIFACT_VERSION
from ..core.exceptions import ConfigError, NCQMError
from ..core.jacobi import JacobiChecker, StructureConstants
from ..core.lsz import LszModel, LszState
from .run_config import TASKS, RunConfig
from .runner import run, write_profile_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def _task_list(value: str) -> list[str]:
    tasks = [task.strip() for task in value.split(",") if task.strip()]
    unknown = [task for task in tasks if task not in TASKS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown task {unknown[0]!r}, choose from {', '.join(TASKS)}")
    return tasks


def build_parser() -> argparse.ArgumentParser:
    """Build the command-line parser with its four subcommands."""
    parser = argparse.ArgumentParser(
        prog="ncqm_brackets",
        description="Construct and verify brackets of position-dependent noncommutative quantum mechanics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {ARTIFACT_VERSION}")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log per-grid statistics")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run the full verification pipeline")
    run_parser.add_argument("--config", type=Path, required=True, help="JSON run configuration")
    run_parser.add_argument("--out", type=Path, default=Path("out"), help="Output directory (default: out)")
    run_parser.add_argument("--tasks", type=_task_list, default=None, help=f"Comma list from {', '.join(TASKS)}")
    run_parser.add_argument("--jet-order", type=int, default=None, help="Jet order of ω₀ in the ω₂ task (>= 3)")

    profile_parser = commands.add_parser("profile", help="Tabulate d and the gauge field only")
    profile_parser.add_argument("--config", type=Path, required=True, help="JSON run configuration")
    profile_parser.add_argument("--out", type=Path, default=Path("out"), help="Output directory (default: out)")

    counter_parser = commands.add_parser("counterexample", help="Show the Jacobi obstruction of a linear algebra")
    counter_parser.add_argument("--f1", type=float, default=1.0, help="Structure constant f_1^{12} (default: 1)")
    counter_parser.add_argument("--f2", type=float, default=0.0, help="Structure constant f_2^{12} (default: 0)")

    lsz_parser = commands.add_parser("lsz-check", help="Check the LSZ substitution identity and sector split")
    lsz_parser.add_argument("--theta", type=float, default=0.1, help="Noncommutativity scale (default: 0.1)")
    lsz_parser.add_argument("--samples", type=int, default=100, help="Random states (default: 100)")
    lsz_parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    lsz_parser.add_argument(
        "--tolerance", type=float, default=1e-12, help="Threshold of the sector split (default: 1e-12)"
    )
    lsz_parser.add_argument(
        "--substitution-tolerance",
        type=float,
        default=1e-13,
        help="Threshold of the y = xdot identity (default: 1e-13)",
    )
    return parser


def command_run(args: argparse.Namespace) -> int:
    """Run the pipeline and print the text report."""
    config = RunConfig.from_file(args.config).with_overrides(tasks=args.tasks, jet_order=args.jet_order)
    report = run(config, args.out)
    print(report.to_text(), end="")
    return EXIT_OK if report.passed else EXIT_FAILED


def command_profile(args: argparse.Namespace) -> int:
    """Write profile.csv."""
    config = RunConfig.from_file(args.config)
    try:
        path = write_profile_table(config, args.out)
    except NCQMError as error:
        print(f"Profile rejected: {error}")
        return EXIT_FAILED
    print(f"Wrote {path}")
    return EXIT_OK


def command_counterexample(args: argparse.Namespace) -> int:
    """Print the violation table of ω^{12} = f_1^{12} x + f_2^{12} y with canonical momenta."""
    table = np.zeros((2, 2, 2))
    table[0, 0, 1], table[0, 1, 0] = args.f1, -args.f1
    table[1, 0, 1], table[1, 1, 0] = args.f2, -args.f2
    try:
        violations = JacobiChecker.linear_counterexample(StructureConstants(table))
    except NCQMError as error:
        print(f"Counterexample check failed: {error}")
        return EXIT_FAILED
    print("Jacobi sums for (p_k, x^i, x^j):")
    for k in range(2):
        print(f"  k={k + 1}: (x, y) -> {violations[k, 0, 1]:+.17g}   (y, x) -> {violations[k, 1, 0]:+.17g}")
    return EXIT_OK


def command_lsz_check(args: argparse.Namespace) -> int:
    """Check the LSZ identities on random states and print the largest deviations."""
    rng = np.random.default_rng(args.seed)
    substitution = split = 0.0
    for _ in range(args.samples):
        state = LszState.random(rng, args.theta)
        on_shell = state.replace(y=state.xdot)
        substitution = max(
            substitution,
            abs(LszModel.lagrangian_L0(on_shell) - LszModel.lsz_lagrangian(on_shell.xdot, on_shell.ydot, args.theta)),
        )
        split = max(split, abs(LszModel.decomposition_residual(state) - LszModel.boundary_term(state)))
    print(f"max |L0(y = xdot) - L_LSZ|              = {substitution:.3e}")
    print(f"max |L_ext + L_int - L0 - boundary term| = {split:.3e}")
    passed = split <= args.tolerance and substitution <= args.substitution_tolerance
    print("PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    """
    Parse arguments, configure logging and dispatch to a subcommand.

    Args:
        argv (Sequence[str] | None): Arguments without the program name; defaults to sys.argv.

    Returns:
        int: 0 on success, 1 on a failed check, 2 on a usage or configuration error, 3 on an I/O error.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT, force=True)
    handlers = {
        "run": command_run,
        "profile": command_profile,
        "counterexample": command_counterexample,
        "lsz-check": command_lsz_check,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as error:
        logger.error("Invalid configuration: %s", error)  # noqa: TRY400
        return EXIT_USAGE
    except NCQMError as error:
        logger.error("%s", error)  # noqa: TRY400
        return EXIT_FAILED
    except OSError as error:
        logger.error("I/O error: %s", error)  # noqa: TRY400
        return EXIT_IO
