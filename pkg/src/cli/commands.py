"""
Command implementations.
Single runs, strategy/penalty/CPU sweeps and the exact solver scalability
benchmark. Every command returns a process exit code.
"""
import csv
import functools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from ..cost.model import CostParams, StatsWindow, StepStats, WorkerProfile
from ..errors import FlowGraphError, Infeasible, ScenarioError
from ..flow.graph import build_flow_graph, enumerate_paths
from ..flow.presets import layered_flow
from ..metrics.compare import compare_strategies, write_comparison_csv, write_comparison_json
from ..metrics.report import MetricsReport
from ..sim.config import ScenarioConfig, strategy_label
from ..sim.engine import SimulationRun, Simulator
from ..sim.events import dump_event_log
from ..solvers.base import SolveRequest, SolveResult, Strategy
from ..solvers.exact import solve_exact
from .scenario_file import load_scenario, save_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4

SWEEP_PENALTIES = (1.0, 1.25, 1.5, 1.75, 2.0)
CPU_FACTORS = (1.0, 0.5)
REFERENCE_PENALTY = 1.25

SOLVER_WINDOW_COLUMNS = ("window", "time_ms", "label", "status", "objective", "nodes", "elapsed_ms",
                         "first_feasible_ms", "changes")
SCALE_COLUMNS = ("size", "steps", "workers", "seed", "status", "first_feasible_ms", "elapsed_ms", "nodes",
                 "objective")


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ScenarioError, FlowGraphError)):
        return EXIT_CONFIG
    if isinstance(error, Infeasible):
        return EXIT_INFEASIBLE
    return EXIT_INTERNAL


def with_exit_codes(command: Callable[..., int]) -> Callable[..., int]:
    """Turn errors raised by a command into an exit code and a diagnostic on stderr"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs) -> int:
        try:
            return command(*args, **kwargs)
        except Exception as e:
            print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
            logger.debug("%s failed", command.__name__, exc_info=True)
            return exit_code_for(e)
    return wrapper


def apply_overrides(config: ScenarioConfig, overrides: Optional[Mapping[str, Any]]) -> ScenarioConfig:
    """
    Apply command line overrides; None values are ignored.

    Raises:
        ScenarioError: If an override makes the scenario invalid
    """
    if not overrides:
        return config
    changes = dict(overrides)
    if isinstance(changes.get("strategy"), str):
        try:
            changes["strategy"] = Strategy(changes["strategy"].upper())
        except ValueError:
            raise ScenarioError(f"unknown strategy '{changes['strategy']}'", field="strategy") from None
    try:
        return config.with_overrides(**changes)
    except ValueError as e:
        raise ScenarioError(str(e)) from None


def write_json(data: Any, path: Path) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def write_rows(path: Path, columns: Sequence[str], rows: Sequence[Any]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if getattr(row, c) is None else getattr(row, c) for c in columns])


def write_run(run: SimulationRun, out_dir: Union[str, Path], events: bool = True) -> Path:
    """
    Write one run directory: scenario snapshot, event log, report and the
    per-window solver timings.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_scenario(run.config, out_dir / "scenario.json")
    if events:
        with open(out_dir / "events.jsonl", "w") as f:
            dump_event_log(run.events, f)
    write_json(run.report.to_dict(), out_dir / "report.json")
    write_rows(out_dir / "solver_windows.csv", SOLVER_WINDOW_COLUMNS, run.solver_windows)
    return out_dir


@with_exit_codes
def cmd_run(scenario_path: Union[str, Path], out_dir: Union[str, Path],
            overrides: Optional[Mapping[str, Any]] = None) -> int:
    """
    Run one simulation and write its run directory.

    Args:
        scenario_path: Scenario file
        out_dir: Receives scenario.json, events.jsonl, report.json and solver_windows.csv
        overrides: strategy, seed, penalty, cpu_factor, eval_period_ms, run_duration_ms, time_limit_ms
    """
    config = apply_overrides(load_scenario(scenario_path), overrides)
    run = Simulator(config).run()
    path = write_run(run, out_dir)
    logger.info("%s seed %d: report written to %s", run.report.label, config.seed, path)
    return EXIT_OK


@dataclass(frozen=True)
class SweepJob:
    config: ScenarioConfig
    out_dir: Path
    events: bool = False


def run_job(job: SweepJob) -> MetricsReport:
    """Run one sweep member into its own directory"""
    run = Simulator(job.config).run()
    write_run(run, job.out_dir, events=job.events)
    return run.report


def sweep_configs(base: ScenarioConfig, strategies: Sequence[Strategy], seeds: Sequence[int],
                  penalties: Sequence[float], cpu_factors: Sequence[float] = CPU_FACTORS) -> List[ScenarioConfig]:
    """
    Cross product of strategies, penalties, CPU factors and seeds.

    Penalties only apply to CP; the other strategies run once per CPU factor
    and seed with the scenario's own penalty.
    """
    configs = []
    for strategy in strategies:
        for penalty in (penalties if strategy is Strategy.CP else (None,)):
            for cpu in cpu_factors:
                for seed in seeds:
                    configs.append(base.with_overrides(strategy=strategy, penalty=penalty, cpu_factor=cpu,
                                                       seed=seed))
    return configs


def table_labels(labels: Sequence[str], strategies: Sequence[Strategy], penalties: Sequence[float],
                 reference_penalty: float = REFERENCE_PENALTY) -> Dict[str, List[str]]:
    """
    Labels of the three experiment tables.

    a: the CP penalty sweep at full CPU
    b: every strategy at full CPU, CP at the reference penalty
    c: the strategies of b at every CPU factor
    """
    if reference_penalty not in penalties and penalties:
        reference_penalty = penalties[0]
    chosen = {strategy_label(s, reference_penalty) for s in strategies}
    full_cpu = [l for l in labels if "@cpu" not in l]
    return {
        "a": [l for l in full_cpu if l.startswith(Strategy.CP.value + "_")],
        "b": [l for l in full_cpu if l in chosen],
        "c": [l for l in labels if l.split("@cpu")[0] in chosen],
    }


@with_exit_codes
def cmd_sweep(scenario_path: Union[str, Path], out_dir: Union[str, Path], strategies: Sequence[Strategy],
              seeds: Sequence[int], penalties: Sequence[float] = SWEEP_PENALTIES,
              cpu_factors: Sequence[float] = CPU_FACTORS, jobs: int = 1,
              overrides: Optional[Mapping[str, Any]] = None, events: bool = False) -> int:
    """
    Run every combination of strategy, seed, penalty and CPU factor and write
    the comparison tables.

    Each run gets runs/<label>/seed_<seed>/ under out_dir. Tables are written
    as comparison.{csv,json} (all labels) and table_{a,b,c}.{csv,json}.
    """
    base = apply_overrides(load_scenario(scenario_path), overrides)
    strategies = [Strategy(s.upper()) if isinstance(s, str) else s for s in strategies]
    out_dir = Path(out_dir)
    configs = sweep_configs(base, strategies, seeds, penalties, cpu_factors)
    sweep = [SweepJob(c, out_dir / "runs" / c.label / f"seed_{c.seed}", events) for c in configs]
    logger.info("Sweep of %d runs with %d job(s)", len(sweep), jobs)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_job, sweep))
    else:
        reports = [run_job(job) for job in sweep]

    grouped: Dict[str, List[MetricsReport]] = {}
    for report in reports:
        grouped.setdefault(report.label, []).append(report)
    rows = compare_strategies(grouped)
    write_comparison_csv(rows, out_dir / "comparison.csv")
    write_comparison_json(rows, out_dir / "comparison.json")
    for name, labels in table_labels([r.label for r in rows], strategies, penalties).items():
        selected = [r for r in rows if r.label in labels]
        write_comparison_csv(selected, out_dir / f"table_{name}.csv")
        write_comparison_json(selected, out_dir / f"table_{name}.json")
    for row in rows:
        logger.info("%s: min path %.2f/min (std %.2f), last event %.2f/min", row.label,
                    row.mean("min_path_rate"), row.std("min_path_rate"), row.mean("last_event_throughput"))
    return EXIT_OK


@dataclass(frozen=True)
class ScaleRow:
    """Exact solver timing for one instance size and seed"""
    size: int
    steps: int
    workers: int
    seed: int
    status: str
    first_feasible_ms: Optional[int]
    elapsed_ms: int
    nodes: int
    objective: float


def scale_request(size: int, max_workers: int, seed: int, time_limit_ms: int,
                  node_limit: Optional[int] = None) -> SolveRequest:
    """
    Layered instance with size layers of size fully connected steps and
    random statistics drawn from the seed.
    """
    n_steps = size * size
    n_workers = max(1, min(n_steps, max_workers))
    capacity = max(2, math.ceil(n_steps / n_workers))
    workers = [WorkerProfile(f"w{i + 1}", code_capacity=capacity) for i in range(n_workers)]
    sources, steps = layered_flow(size, size, workers=n_workers)
    graph = build_flow_graph(sources, steps)
    rng = np.random.default_rng(seed)
    stats = {
        sid: StepStats(
            step_id=sid,
            read_ms=float(rng.uniform(1.0, 10.0)),
            execute_ms=float(rng.uniform(1.0, 20.0)),
            write_ms=float(rng.uniform(1.0, 10.0)),
            bytes=int(rng.integers(1_000, 100_000)),
        )
        for sid in graph.step_ids
    }
    params = CostParams(solver_time_limit_ms=time_limit_ms, solver_node_limit=node_limit)
    return SolveRequest(graph, tuple(enumerate_paths(graph)), StatsWindow(0.0, 0.0, stats), tuple(workers),
                        params, seed=seed)


def scale_row(size: int, seed: int, req: SolveRequest, result: SolveResult) -> ScaleRow:
    return ScaleRow(size, len(req.graph.step_ids), len(req.workers), seed, result.status.value,
                    result.first_feasible_ms, result.elapsed_ms, result.nodes, result.objective)


@with_exit_codes
def cmd_scale(max_steps: int, max_workers: int, time_limit_ms: int, out_dir: Union[str, Path],
              seeds: Sequence[int] = (0, 1, 2)) -> int:
    """
    Time the exact solver on layered flows of growing size.

    Sizes k = 2, 3, ... build k layers of k steps while k * k <= max_steps.
    Writes scale.csv with one row per size and seed and scale_summary.csv
    with the median timings per size.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: List[ScaleRow] = []
    size = 2
    while size * size <= max_steps:
        for seed in seeds:
            req = scale_request(size, max_workers, seed, time_limit_ms)
            rows.append(scale_row(size, seed, req, solve_exact(req)))
        timings = [r.elapsed_ms for r in rows if r.size == size]
        logger.info("%dx%d on %d workers: median %.0f ms (%s)", size, size, rows[-1].workers,
                    float(np.median(timings)), ", ".join(r.status for r in rows if r.size == size))
        size += 1

    write_rows(out_dir / "scale.csv", SCALE_COLUMNS, rows)
    with open(out_dir / "scale_summary.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["size", "steps", "workers", "median_first_feasible_ms", "median_elapsed_ms", "optimal"])
        for s in sorted({r.size for r in rows}):
            group = [r for r in rows if r.size == s]
            writer.writerow([
                s, group[0].steps, group[0].workers,
                float(np.median([r.first_feasible_ms or 0 for r in group])),
                float(np.median([r.elapsed_ms for r in group])),
                sum(r.status == "Optimal" for r in group),
            ])
    return EXIT_OK
