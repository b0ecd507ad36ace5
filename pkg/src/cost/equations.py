"""
Latency and cost equations.
Step latency with remote I/O penalties, path latency, byte-normalized step and
path cost, critical path selection and activation cost.
"""
from typing import Mapping, Optional, Sequence, Tuple

from ..errors import MissingStats
from ..flow.graph import FlowGraph, enumerate_paths
from ..flow.model import FlowPath, StepDef
from .model import CostParams, Placement, StepStats, WorkerProfile

StatsByStep = Mapping[str, StepStats]
Workers = Optional[Mapping[str, WorkerProfile]]


def step_latency(stats: StepStats, step: StepDef, placement: Placement, params: CostParams,
                 graph: FlowGraph, workers: Workers = None) -> float:
    """
    Latency of one execution of a step under a placement.

    Each input stored away from the executing worker has its read time
    multiplied by alpha; the write is multiplied by beta when the step's
    output is stored elsewhere. When worker profiles are given the execute
    time is divided by the executing worker's cpu_factor.

    Args:
        stats: Local-equivalent statistics of the step
        step: The step definition
        placement: Placement under evaluation
        params: Penalty multipliers
        graph: Flow graph resolving input topics to producers
        workers: Optional worker profiles by id

    Returns:
        Latency in milliseconds
    """
    worker = placement.code_loc[step.id]
    inputs = graph.inputs_of(step.id)
    read = 0.0
    for producer, t_read in stats.read_for(inputs).items():
        read += t_read if placement.data_loc[producer] == worker else params.alpha * t_read
    execute = stats.execute_ms
    if workers is not None:
        execute /= workers[worker].cpu_factor
    write = stats.write_ms
    if placement.data_loc[step.id] != worker:
        write *= params.beta
    return read + execute + write


def _stats_for(stats_by_step: StatsByStep, step_id: str) -> StepStats:
    try:
        return stats_by_step[step_id]
    except KeyError:
        raise MissingStats(step_id) from None


def path_latency(path: FlowPath, stats_by_step: StatsByStep, placement: Placement, params: CostParams,
                 graph: FlowGraph, workers: Workers = None) -> float:
    """
    Sum of step latencies along a path.

    Raises:
        MissingStats: If a step on the path has no statistics
    """
    return sum(
        step_latency(_stats_for(stats_by_step, sid), graph.step(sid), placement, params, graph, workers)
        for sid in path.steps
    )


def step_cost(stats: StepStats, step: StepDef, placement: Placement, params: CostParams,
              graph: FlowGraph, workers: Workers = None) -> float:
    """Step latency divided by the bytes the step processed in the window"""
    return step_latency(stats, step, placement, params, graph, workers) / stats.bytes


def path_cost(path: FlowPath, stats_by_step: StatsByStep, placement: Placement, params: CostParams,
              graph: FlowGraph, workers: Workers = None) -> float:
    """
    Sum of step costs along a path.

    Raises:
        MissingStats: If a step on the path has no statistics
    """
    return sum(
        step_cost(_stats_for(stats_by_step, sid), graph.step(sid), placement, params, graph, workers)
        for sid in path.steps
    )


def critical_path(graph: FlowGraph, stats_by_step: StatsByStep, placement: Placement, params: CostParams,
                  workers: Workers = None, paths: Optional[Sequence[FlowPath]] = None) -> Tuple[FlowPath, float]:
    """
    The path with the highest cost.

    Ties go to the lexicographically smallest step sequence.

    Returns:
        (path, cost)

    Raises:
        MissingStats: If any path step has no statistics
    """
    if paths is None:
        paths = enumerate_paths(graph)
    best: Optional[Tuple[FlowPath, float]] = None
    for path in sorted(paths, key=lambda p: p.steps):
        cost = path_cost(path, stats_by_step, placement, params, graph, workers)
        if best is None or cost > best[1]:
            best = (path, cost)
    if best is None:
        raise ValueError("Flow graph has no paths")
    return best


def activation_cost(step: Optional[StepDef], worker: WorkerProfile) -> float:
    """
    Time to activate a step on a worker: code download plus topic subscription.

    Only the simulator charges it, on migration.
    """
    return worker.download_ms + worker.subscribe_ms
