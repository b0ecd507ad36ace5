"""
Command line entry point.

Examples:
    python -m src run --scenario scenarios/smart_vehicle.json --strategy CP --penalty 1.25 --out out/cp
    python -m src sweep --scenario scenarios/smart_vehicle.json --seeds 25 --jobs 4 --out out/sweep
    python -m src scale --max-steps 25 --max-workers 25 --time-limit-ms 60000 --out out/scale
"""
import argparse
import logging
import sys
from typing import List, Optional

from ..solvers.base import Strategy
from .commands import SWEEP_PENALTIES, CPU_FACTORS, cmd_run, cmd_scale, cmd_sweep

STRATEGY_CHOICES = [s.value for s in Strategy]
SWEEP_DEFAULT = [Strategy.CP.value, Strategy.GA.value, Strategy.CRRB.value, Strategy.RANDOM.value,
                 Strategy.LOCAL.value]


def _strategy(text: str) -> str:
    value = text.upper()
    if value not in STRATEGY_CHOICES:
        raise argparse.ArgumentTypeError(f"invalid strategy '{text}' (choose from {', '.join(STRATEGY_CHOICES)})")
    return value


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", required=True, help="Scenario file (JSON)")
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--eval-period", type=float, dest="eval_period_ms", help="Evaluation period in ms")
    parser.add_argument("--duration", type=float, dest="run_duration_ms", help="Run duration in virtual ms")
    parser.add_argument("--time-limit-ms", type=int, help="Exact solver time limit per window")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cep-placement",
        description="Simulate and compare CEP step placement strategies",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("Examples:", 1)[1],
    )
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Diagnostic log level")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one simulation")
    _add_common(run)
    run.add_argument("--strategy", type=_strategy, help="Placement strategy")
    run.add_argument("--seed", type=int, help="Seed of the run")
    run.add_argument("--penalty", type=float, help="Device change penalty")
    run.add_argument("--cpu-factor", type=float, help="CPU factor of every worker")
    run.add_argument("--jobs", type=int, default=1, help="Parallel simulations; a single run uses one")

    sweep = sub.add_parser("sweep", help="Compare strategies across seeds, penalties and CPU factors")
    _add_common(sweep)
    sweep.add_argument("--strategy", type=_strategy, nargs="+", dest="strategies", default=SWEEP_DEFAULT,
                       help="Strategies to compare")
    sweep.add_argument("--seed", type=int, default=0, help="First seed")
    sweep.add_argument("--seeds", type=int, default=25, help="Number of seeds per configuration")
    sweep.add_argument("--penalty", type=float, nargs="+", dest="penalties", default=list(SWEEP_PENALTIES),
                       help="Device change penalties for CP")
    sweep.add_argument("--cpu-factor", type=float, nargs="+", dest="cpu_factors", default=list(CPU_FACTORS),
                       help="CPU factors applied to every worker")
    sweep.add_argument("--jobs", type=int, default=1, help="Parallel simulations")
    sweep.add_argument("--events", action="store_true", help="Also write the event log of every run")

    scale = sub.add_parser("scale", help="Time the exact solver on layered flows of growing size")
    scale.add_argument("--out", required=True, help="Output directory")
    scale.add_argument("--max-steps", type=int, default=25, help="Largest number of steps")
    scale.add_argument("--max-workers", type=int, default=25, help="Largest number of workers")
    scale.add_argument("--time-limit-ms", type=int, default=60_000, help="Solver time limit per instance")
    scale.add_argument("--seeds", type=int, default=3, help="Seeds per size")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s: %(message)s")

    if args.command == "scale":
        return cmd_scale(args.max_steps, args.max_workers, args.time_limit_ms, args.out, range(args.seeds))

    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    overrides = {
        "eval_period_ms": args.eval_period_ms,
        "run_duration_ms": args.run_duration_ms,
        "time_limit_ms": args.time_limit_ms,
    }
    if args.command == "run":
        overrides.update(strategy=args.strategy, seed=args.seed, penalty=args.penalty, cpu_factor=args.cpu_factor)
        return cmd_run(args.scenario, args.out, overrides)

    if args.seeds < 1:
        print("error: --seeds must be >= 1", file=sys.stderr)
        return 2
    seeds = range(args.seed, args.seed + args.seeds)
    return cmd_sweep(args.scenario, args.out, args.strategies, seeds, args.penalties, args.cpu_factors,
                     args.jobs, overrides, args.events)


if __name__ == "__main__":
    sys.exit(main())
