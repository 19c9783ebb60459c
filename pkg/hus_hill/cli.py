#!/usr/bin/env python3
"""
Command-line interface for hus_hill

Subcommands:
  analyze  Stability report for one cycle and family
  track    Perturb, track and certify one trajectory
  sweep    Stability rows over a parameter grid
  oracle   Extremal-ratio search over residual sign patterns
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Dict, List, Optional, Sequence

from hus_hill import constants
from hus_hill.config import AnalysisConfig, ConfigError
from hus_hill.dynamics import DivergenceError, expanding_stages, perturb
from hus_hill.grid import WindowError
from hus_hill.models import Verdict
from hus_hill.oracle import extremal_ratio_oracle
from hus_hill.report import (
    SWEEP_COLUMNS,
    TRAJECTORY_COLUMNS,
    analysis_document,
    emit,
    sweep_row,
    tracking_document,
)
from hus_hill.stability import DegenerateError, NotStableError, build_equation, stability_report
from hus_hill.tracking import InconclusiveError, track
from hus_hill.utils import worker_count

logger = logging.getLogger("hus_hill.cli")

VERDICT_EXIT_CODES = {
    Verdict.STABLE: constants.EXIT_OK,
    Verdict.NOT_STABLE: constants.EXIT_NOT_STABLE,
    Verdict.DEGENERATE: constants.EXIT_DEGENERATE,
}


def setup_logging(verbose: bool = False) -> None:
    """Setup logging configuration; logs go to stderr so stdout stays a clean document."""
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def load_config(args: argparse.Namespace) -> AnalysisConfig:
    """Config file (if any) with command-line flags applied on top."""
    config = AnalysisConfig.from_json_file(args.config) if args.config else AnalysisConfig()
    return config.merge_cli(args)


def cmd_analyze(args: argparse.Namespace) -> int:
    """Handle analyze command."""
    config = load_config(args)
    family = config.family_enum()
    cycle = config.resolve_cycle()
    report = stability_report(cycle, family)
    emit(analysis_document(report, build_equation(family, cycle)), args.out, sys.stdout)
    if report.verdict is not Verdict.STABLE:
        logger.error(f"{family.value} on {list(cycle.values)}: {report.verdict.value}")
    return VERDICT_EXIT_CODES[report.verdict]


def cmd_track(args: argparse.Namespace) -> int:
    """Handle track command."""
    config = load_config(args)
    family = config.family_enum()
    cycle = config.resolve_cycle()
    window = config.window_for(cycle.n)
    spec = build_equation(family, cycle, config.forcing_trajectory(cycle.h, window + 1))

    bounded = config.bounded
    expanding = expanding_stages(spec)
    if expanding and not bounded:
        stages = ", ".join(stage.value for stage in expanding)
        logger.info(f"Expanding stage(s) {stages}: building the trajectory in bounded mode")
        bounded = True

    psi = perturb(spec, config.residual_profile(), window=window, bounded=bounded)
    result = track(spec, psi)
    report = stability_report(cycle, family)

    document = tracking_document(result, report, psi, config.trajectories)
    document["bounded"] = bounded
    if args.out == constants.OUTPUT_CSV and config.trajectories:
        emit(document, args.out, sys.stdout, rows=document["trajectories"], columns=TRAJECTORY_COLUMNS)
    else:
        emit(document, args.out, sys.stdout)
    return constants.EXIT_OK


def _sweep_point(config: AnalysisConfig, index: int, value: float) -> Dict[str, Any]:
    assert config.sweep is not None
    cycle = config.resolve_cycle({config.sweep.param: float(value)}, strict=False)
    return sweep_row(index, config.sweep.param, float(value), stability_report(cycle, config.family_enum()))


def run_sweep(config: AnalysisConfig, max_workers: Optional[int] = None) -> List[Dict[str, Any]]:
    """
    One stability row per grid point, ordered by grid index.

    Raises:
        ConfigError: If the config has no sweep or a point fails to resolve
    """
    if config.sweep is None:
        raise ConfigError("sweep: required for the sweep command (name:min:max:count)")

    points = config.sweep.points()
    rows: List[Optional[Dict[str, Any]]] = [None] * len(points)
    with ThreadPoolExecutor(max_workers=worker_count(max_workers)) as executor:
        future_to_index = {
            executor.submit(_sweep_point, config, i, value): i for i, value in enumerate(points)
        }
        for future in as_completed(future_to_index):
            rows[future_to_index[future]] = future.result()

    finished = [row for row in rows if row is not None]
    skipped = sum(1 for row in finished if row["skipped"])
    if skipped:
        logger.warning(f"Skipped {skipped} of {len(finished)} sweep points near excluded values")
    logger.info(f"Sweep over {config.sweep.param}: {len(finished)} points")
    return finished


def cmd_sweep(args: argparse.Namespace) -> int:
    """Handle sweep command."""
    config = load_config(args)
    rows = run_sweep(config)
    assert config.sweep is not None
    document = {
        "family": config.family_enum().value,
        "param": config.sweep.param,
        "rows": rows,
    }
    emit(document, args.out, sys.stdout, rows=rows if args.out == constants.OUTPUT_CSV else None,
         columns=SWEEP_COLUMNS)
    return constants.EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    """Handle oracle command."""
    config = load_config(args)
    family = config.family_enum()
    cycle = config.resolve_cycle()
    estimate = extremal_ratio_oracle(cycle, family, horizon=config.horizon, budget=config.budget, seed=config.seed)
    document = {"family": family.value, "cycle": cycle.to_dict()}
    document.update(estimate.to_dict())
    emit(document, args.out, sys.stdout)
    return constants.EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="hus-hill - Hyers-Ulam stability of periodic h-difference equations",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Examples:\n"
               "  hus-hill analyze --h 1 --cycle 0,0.5,-0.5 --family Hill\n"
               "  hus-hill analyze --h 0.1 --cycle pi,2*pi --family PQR\n"
               "  hus-hill track --h 1 --cycle 0.5 --family Hill --epsilon 1e-3 --bounded\n"
               "  hus-hill sweep --h 1 --cycle 0,A,-A --param A=1 --sweep A:0.01:3:500\n"
               "  hus-hill oracle --h 1 --cycle 0.5 --family FirstHomog --horizon 12\n\n"
               "Exit codes: 0 ok, 2 config error, 3 not stable, 4 degenerate, 5 inconclusive"
    )
    parser.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Enable verbose logging"
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file; flags override its fields")
    common.add_argument(
        "--out",
        default=constants.OUTPUT_JSON,
        choices=[constants.OUTPUT_JSON, constants.OUTPUT_CSV],
        help="Output format (default: json)"
    )
    common.add_argument("--seed", type=int, default=None, help="Seed for random residuals and patterns")
    common.add_argument("--window", type=int, default=None, help="Window length in steps (default: 64*n)")
    common.add_argument("--h", default=None, help="Step size, number or expression")
    common.add_argument("--cycle", default=None, help="Comma-separated cycle values, e.g. 'pi,2*pi'")
    common.add_argument("--family", default=None, help="FirstHomog, FirstNonhomog, Hill, HillNonhomog, PQR..PQR4")
    common.add_argument("--sign", default=None, choices=["+", "-"], help="First-order sign (selects the family)")
    common.add_argument(
        "--param",
        action="append",
        default=None,
        metavar="NAME=VALUE",
        help="Named parameter usable in expressions (repeatable)"
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    analyze_parser = subparsers.add_parser("analyze", parents=[common], help="Stability report for one cycle")
    analyze_parser.set_defaults(func=cmd_analyze)

    track_parser = subparsers.add_parser("track", parents=[common], help="Track an ε-perturbed trajectory")
    track_parser.add_argument("--epsilon", type=float, default=None, help="Residual bound (default: 1e-3)")
    track_parser.add_argument(
        "--profile",
        default=None,
        help="constant_plus, constant_minus, alternating, random_uniform or explicit:v1,v2,..."
    )
    track_parser.add_argument("--forcing", default=None, help="Comma-separated periodic forcing values")
    track_parser.add_argument(
        "--bounded",
        action="store_true",
        help="Build the perturbed trajectory stage by stage in each stage's stable direction (always on for expanding cycles)"
    )
    track_parser.add_argument(
        "--trajectories",
        action="store_true",
        help="Include psi, exact and deviation per index"
    )
    track_parser.set_defaults(func=cmd_track)

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Stability rows over a parameter grid")
    sweep_parser.add_argument("--sweep", default=None, metavar="NAME:MIN:MAX:COUNT", help="Parameter grid")
    sweep_parser.set_defaults(func=cmd_sweep)

    oracle_parser = subparsers.add_parser("oracle", parents=[common], help="Extremal-ratio search")
    oracle_parser.add_argument("--horizon", type=int, default=None, help="Residuals per pattern (default: 4*n)")
    oracle_parser.add_argument("--budget", type=int, default=None, help="Pattern budget (default: 65536)")
    oracle_parser.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return constants.EXIT_FAILURE

    setup_logging(args.verbose)

    try:
        return args.func(args)
    except (ConfigError, WindowError) as e:
        logger.error(f"Configuration error: {e}")
        return constants.EXIT_CONFIG
    except NotStableError as e:
        logger.error(f"Not Hyers-Ulam stable: {e}")
        return constants.EXIT_NOT_STABLE
    except DegenerateError as e:
        logger.error(f"Degenerate cycle: {e}")
        return constants.EXIT_DEGENERATE
    except InconclusiveError as e:
        logger.error(f"Inconclusive: {e}")
        return constants.EXIT_INCONCLUSIVE
    except DivergenceError as e:
        logger.error(f"Simulation diverged: {e}")
        return constants.EXIT_FAILURE
    except KeyboardInterrupt:
        print("\n\nInterrupted by user", file=sys.stderr)
        return constants.EXIT_INTERRUPTED
    except Exception:
        logging.exception("Unexpected error")
        return constants.EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
