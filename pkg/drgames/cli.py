"""
drgames CLI

Command-line interface for distributionally robust games: validate game
files, compute best responses and equilibrium gaps, search and certify
equilibria, and run the inspection game experiments.
"""

import argparse
import csv
import json
import logging
import os
import sys
from typing import Any, List, Optional

import numpy as np

from .ambiguity import validate
from .certificate import build_certificate
from .constants import OutputFormats, Tolerances
from .equilibrium import best_response, verify_equilibrium
from .exceptions import AmbiguitySetError, DrgamesError, InvalidStrategyError
from .experiment import format_number, run_experiment, write_csv, write_json, write_outputs
from .gamefile import ExperimentSpec, GameFile
from .game_model import GameShape, StrategyProfile
from .inspection import InspectionParams
from .search import SearchConfig, find_equilibria

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = "DRGAMES_LOG_LEVEL"


def configure_logging(level: Optional[str] = None) -> None:
    """Root logging setup, from --log-level or DRGAMES_LOG_LEVEL"""
    level = (level or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _rounded(value: Any) -> Any:
    """Every float of a JSON-ready structure cut to the printed precision"""
    if isinstance(value, dict):
        return {k: _rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v) for v in value]
    if isinstance(value, np.ndarray):
        return _rounded(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            return str(value)
        return float(format_number(value))
    return value


def _print_json(data: Any) -> None:
    print(json.dumps(_rounded(data), indent=2))


def _numbers(values) -> str:
    return ", ".join(format_number(v) for v in values)


def parse_profile(text: str, shape: GameShape) -> StrategyProfile:
    """Comma-separated stacked strategies, e.g. '0.333,0.667,0.666,0.334'"""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidStrategyError(f"Profile must be comma-separated numbers, got '{text}'")
    return StrategyProfile.from_stacked(shape, values)


def load_game(path: str) -> GameFile:
    """Read a game file and refuse ambiguity sets that fail validation"""
    game = GameFile.load(path)
    report = validate(game.ambiguity)
    if not report.passed:
        failure = report.failures[0]
        raise AmbiguitySetError(f"{path}: {failure.name} check failed: {failure.message}",
                                details=report.to_dict())
    return game


def cmd_validate(args) -> int:
    game = GameFile.load(args.file)
    report = validate(game.ambiguity)
    if args.format == OutputFormats.JSON:
        _print_json(report.to_dict())
    elif args.format == OutputFormats.CSV:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["check", "passed", "message"])
        for check in report.checks:
            writer.writerow([check.name, str(check.passed).lower(), check.message])
    else:
        for check in report.checks:
            mark = "✅" if check.passed else "❌"
            print(f"{mark} {check.name}: {check.message}")
        if report.passed:
            print(f"\n✅ {args.file}: ambiguity set is valid ({game.shape} game)")
        else:
            print(f"\n❌ {args.file}: {len(report.failures)} check(s) failed")
    return 0 if report.passed else 1


def cmd_best_response(args) -> int:
    game = load_game(args.file)
    shape = game.shape
    i = shape.check_player(args.player - 1)
    profile = parse_profile(args.profile, shape) if args.profile else StrategyProfile.uniform(shape)
    response = best_response(game.ambiguity, game.risk[i], profile, i)
    strategy = response.strategy.probs
    if args.format == OutputFormats.JSON:
        _print_json({"player": args.player, "strategy": strategy, "value": response.value,
                     "robust_payoff": -response.value})
    elif args.format == OutputFormats.CSV:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["player", *(f"u_{j + 1}" for j in range(strategy.size)), "value"])
        writer.writerow([args.player, *(format_number(p) for p in strategy),
                         format_number(response.value)])
    else:
        print(f"Best response of player {args.player} (eps = {format_number(game.risk[i])})")
        print(f"  strategy: [{_numbers(strategy)}]")
        print(f"  worst-case CVaR: {format_number(response.value)}")
        print(f"  robust payoff:   {format_number(-response.value)}")
    return 0


def cmd_verify(args) -> int:
    game = load_game(args.file)
    profile = parse_profile(args.profile, game.shape)
    report = verify_equilibrium(game.ambiguity, game.risk, profile, args.tol)
    gap = report.gap
    if args.format == OutputFormats.JSON:
        _print_json(report.to_dict())
    elif args.format == OutputFormats.CSV:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["player", "current", "best", "gap"])
        for k, (c, b, g) in enumerate(zip(gap.current_values, gap.best_values, gap.player_gaps)):
            writer.writerow([k + 1, format_number(c), format_number(b), format_number(g)])
    else:
        for k, (c, b, g) in enumerate(zip(gap.current_values, gap.best_values, gap.player_gaps)):
            print(f"Player {k + 1}: current {format_number(c)}, best {format_number(b)}, "
                  f"gap {format_number(g)}")
        mark = "✅" if report.is_equilibrium else "❌"
        verdict = "is" if report.is_equilibrium else "is not"
        print(f"\n{mark} Total gap {format_number(gap.total)}: profile {verdict} an equilibrium "
              f"(tol {format_number(args.tol)})")
    return 0


def _search_config(args) -> SearchConfig:
    return SearchConfig(restarts=args.restarts, seed=args.seed, gap_tol=args.tol,
                        workers=args.workers)


def cmd_solve(args) -> int:
    game = load_game(args.file)
    records = find_equilibria(game.ambiguity, game.risk, _search_config(args))
    shape = game.shape
    if args.format == OutputFormats.JSON:
        _print_json({"equilibria": [r.to_dict() for r in records]})
    elif args.format == OutputFormats.CSV:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        columns = [f"x{k + 1}_{j + 1}" for k, a in enumerate(shape.action_counts) for j in range(a)]
        writer.writerow([*columns, "gap", "source"])
        for record in records:
            writer.writerow([*(format_number(p) for p in record.profile.stacked()),
                             format_number(record.gap), record.source])
    else:
        if not records:
            print("❌ No equilibrium found; try more restarts")
        for n, record in enumerate(records, 1):
            certified = ""
            if record.certificate is not None:
                certified = ", certified" if record.certificate.valid else ", certificate failed"
            print(f"Equilibrium {n} ({record.source}{certified}): gap {format_number(record.gap)}")
            for k, strategy in enumerate(record.profile):
                print(f"  player {k + 1}: [{_numbers(strategy.probs)}]")
        if records:
            print(f"\n✅ Found {len(records)} equilibria")
    return 0


def cmd_certify(args) -> int:
    game = load_game(args.file)
    profile = parse_profile(args.profile, game.shape)
    certificate = build_certificate(game.ambiguity, game.risk, profile, args.tol)
    if args.format == OutputFormats.JSON:
        _print_json(certificate.to_dict())
    elif args.format == OutputFormats.CSV:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["player", "row", "residual"])
        for player in certificate.players:
            for row, value in player.worst_rows().items():
                writer.writerow([player.player + 1, row, format_number(value)])
    else:
        for player in certificate.players:
            print(f"Player {player.player + 1}: rho {format_number(player.rho)}, "
                  f"equality residual {format_number(player.max_equality_residual)}, "
                  f"inequality violation {format_number(player.max_inequality_violation)}")
        mark = "✅" if certificate.valid else "❌"
        verdict = "holds" if certificate.valid else "does not hold"
        print(f"\n{mark} Equilibrium system {verdict} "
              f"(max residual {format_number(certificate.max_residual)}, "
              f"tol {format_number(args.tol)})")
    return 0


def _print_rows(report) -> None:
    for row in report.rows():
        x1, x2 = row.profile.first_probabilities()
        print(f"eps=({format_number(row.eps[0])}, {format_number(row.eps[1])})  "
              f"x=({format_number(x1)}, {format_number(x2)})  "
              f"payoff=({_numbers(row.payoffs)})  robust=({_numbers(row.robust_payoffs)})  "
              f"gap={format_number(row.gap)}")


def cmd_inspection(args) -> int:
    params = InspectionParams(w=args.w, g=(args.g_lo, args.g_hi), v=(args.v_lo, args.v_hi),
                              h=(args.h_lo, args.h_hi), s=args.s)
    report = run_experiment(params, [(args.eps1, args.eps2)], _search_config(args))
    if args.format == OutputFormats.JSON:
        write_json(report, sys.stdout)
    elif args.format == OutputFormats.CSV:
        write_csv(report, sys.stdout)
    else:
        _print_rows(report)
        print(f"\n✅ Found {len(report.rows())} equilibria")
    return 0


def cmd_experiment(args) -> int:
    spec = ExperimentSpec.load(args.spec)
    report = run_experiment(spec.params, spec.grid, spec.search,
                            check_tables=spec.check_tables or args.check_tables)
    written = write_outputs(report, args.out)
    if args.format == OutputFormats.JSON:
        write_json(report, sys.stdout)
    elif args.format == OutputFormats.CSV:
        write_csv(report, sys.stdout)
    else:
        _print_rows(report)
        if report.table_checks:
            passed = sum(check.passed for check in report.table_checks)
            mark = "✅" if passed == len(report.table_checks) else "❌"
            print(f"\n{mark} Published tables: {passed}/{len(report.table_checks)} entries verified")
        for path in written:
            print(f"💾 Saved {path}")
    return 0


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{text}'")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _add_search_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--restarts", type=positive_int, default=8, help="Random starting profiles")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the random starts")
    parser.add_argument("--tol", type=positive_float, default=Tolerances.GAP, help="Gap tolerance")
    parser.add_argument("--workers", type=positive_int, default=1, help="Threads for the restarts")


def _output_options(default_format, default_level) -> argparse.ArgumentParser:
    options = argparse.ArgumentParser(add_help=False)
    options.add_argument("--format", choices=OutputFormats.get_all(), default=default_format,
                         help="Output format")
    options.add_argument("--log-level", default=default_level,
                         help=f"Logging level (default: ${LOG_LEVEL_ENV} or WARNING)")
    return options


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drgames",
        description="drgames CLI - distributionally robust games with risk-averse players",
        parents=[_output_options(OutputFormats.TEXT, None)],
    )
    # SUPPRESS leaves the global value in place when the option is omitted after the command
    common = _output_options(argparse.SUPPRESS, argparse.SUPPRESS)

    subparsers = parser.add_subparsers(dest="command", help="Commands")

    validate_parser = subparsers.add_parser("validate", parents=[common],
                                            help="Validate a game file")
    validate_parser.add_argument("file", help="Game file (YAML)")
    validate_parser.set_defaults(handler=cmd_validate)

    br_parser = subparsers.add_parser("best-response", parents=[common],
                                      help="Best response of one player")
    br_parser.add_argument("file", help="Game file (YAML)")
    br_parser.add_argument("--player", type=int, required=True, help="Player number (1-based)")
    br_parser.add_argument("--profile", help="Stacked profile (default: uniform)")
    br_parser.set_defaults(handler=cmd_best_response)

    verify_parser = subparsers.add_parser("verify", parents=[common],
                                          help="Best-response gap of a profile")
    verify_parser.add_argument("file", help="Game file (YAML)")
    verify_parser.add_argument("--profile", required=True, help="Stacked profile, comma-separated")
    verify_parser.add_argument("--tol", type=positive_float, default=Tolerances.GAP,
                               help="Gap tolerance")
    verify_parser.set_defaults(handler=cmd_verify)

    solve_parser = subparsers.add_parser("solve", parents=[common], help="Search for equilibria")
    solve_parser.add_argument("file", help="Game file (YAML)")
    _add_search_arguments(solve_parser)
    solve_parser.set_defaults(handler=cmd_solve)

    certify_parser = subparsers.add_parser("certify", parents=[common],
                                           help="Evaluate the equilibrium system")
    certify_parser.add_argument("file", help="Game file (YAML)")
    certify_parser.add_argument("--profile", required=True, help="Stacked profile, comma-separated")
    certify_parser.add_argument("--tol", type=positive_float, default=Tolerances.CERTIFICATE,
                                help="Residual tolerance")
    certify_parser.set_defaults(handler=cmd_certify)

    inspection_parser = subparsers.add_parser("inspection", parents=[common],
                                              help="Solve the inspection game")
    defaults = InspectionParams()
    inspection_parser.add_argument("--w", type=float, default=defaults.w, help="Wage")
    for name, label in (("g", "work cost"), ("v", "work value"), ("h", "inspection cost")):
        lo, hi = getattr(defaults, name)
        inspection_parser.add_argument(f"--{name}-lo", type=float, default=lo, help=f"Lowest {label}")
        inspection_parser.add_argument(f"--{name}-hi", type=float, default=hi, help=f"Highest {label}")
    inspection_parser.add_argument("--s", type=float, default=defaults.s, help="Deviation cap")
    inspection_parser.add_argument("--eps1", type=float, default=1.0, help="Employee risk level")
    inspection_parser.add_argument("--eps2", type=float, default=1.0, help="Employer risk level")
    _add_search_arguments(inspection_parser)
    inspection_parser.set_defaults(handler=cmd_inspection)

    experiment_parser = subparsers.add_parser("experiment", parents=[common],
                                              help="Run an experiment file")
    experiment_parser.add_argument("spec", help="Experiment file (YAML)")
    experiment_parser.add_argument("--out", required=True, help="Output directory")
    experiment_parser.add_argument("--check-tables", action="store_true",
                                   help="Also check the published equilibrium tables")
    experiment_parser.set_defaults(handler=cmd_experiment)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    configure_logging(args.log_level)
    if args.command is None:
        parser.print_help()
        return 2

    try:
        return args.handler(args)
    except DrgamesError as e:
        print(f"❌ {e.message}", file=sys.stderr)
        logger.debug(f"{e.error_code}: {e.details}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
