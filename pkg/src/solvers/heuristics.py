"""
Baseline placement heuristics.
Complete round-robin, balanced random and locality greedy strategies.
"""
import logging
from typing import Dict, Sequence

import numpy as np

from ..cost.model import Placement, WorkerProfile
from ..errors import Infeasible
from ..flow.graph import FlowGraph
from .base import SolveRequest, SolveResult, SolveStatus, Stopwatch, result_for

logger = logging.getLogger(__name__)

LOCAL_CODE_CAPACITY = 2


def round_robin_placement(graph: FlowGraph, workers: Sequence[WorkerProfile]) -> Placement:
    """
    Steps sorted by id assigned cyclically to workers sorted by id.

    Step outputs are stored with their code; raw-source outputs stay on the
    source's home worker.

    Raises:
        Infeasible: If the cyclic assignment overloads a worker
    """
    profiles = sorted(workers, key=lambda w: w.id)
    if not profiles:
        raise Infeasible("No workers available")
    code_loc: Dict[str, str] = {}
    for i, sid in enumerate(graph.step_ids):
        code_loc[sid] = profiles[i % len(profiles)].id
    placement = Placement(code_loc, {})
    for worker in profiles:
        hosted = placement.load().get(worker.id, 0)
        if hosted > worker.code_capacity:
            raise Infeasible(f"Round-robin puts {hosted} steps on '{worker.id}' "
                             f"which has capacity {worker.code_capacity}")
    data_loc = dict(code_loc)
    for sid, source in graph.sources.items():
        data_loc[sid] = source.home_worker
    return Placement(code_loc, data_loc)


def solve_crrb(req: SolveRequest) -> SolveResult:
    """Complete round-robin placement"""
    watch = Stopwatch()
    placement = round_robin_placement(req.graph, req.workers)
    problem = req.compile()
    code = np.array([problem.worker_index[placement.code_loc[sid]] for sid in problem.step_ids], dtype=int)
    return result_for(problem, code, problem.default_data(code), SolveStatus.FEASIBLE, watch)


def balanced_assignment(rng: np.random.Generator, n_steps: int, capacity: Sequence[int]) -> np.ndarray:
    """
    Uniformly random worker index per step with per-worker counts differing by at most one.

    Args:
        rng: Seeded generator
        n_steps: Number of steps to place
        capacity: Code capacity per worker

    Raises:
        Infeasible: If a balanced assignment overloads a worker
    """
    capacity = np.asarray(capacity, dtype=int)
    n_workers = len(capacity)
    counts = np.full(n_workers, n_steps // n_workers, dtype=int)
    extra = rng.choice(n_workers, size=n_steps % n_workers, replace=False)
    counts[extra] += 1
    if (counts > capacity).any():
        raise Infeasible(f"No balanced assignment of {n_steps} steps respects worker capacities")
    return rng.permutation(np.repeat(np.arange(n_workers), counts))


def solve_random(req: SolveRequest) -> SolveResult:
    """Balanced random placement, reproducible from the request seed"""
    watch = Stopwatch()
    req.check_capacity()
    problem = req.compile()
    rng = np.random.default_rng(req.seed)
    code = balanced_assignment(rng, problem.n_steps, problem.capacity)
    return result_for(problem, code, problem.default_data(code), SolveStatus.FEASIBLE, watch)


def window_producer_bytes(req: SolveRequest) -> Dict[str, float]:
    """
    Bytes written per producer in the window.

    Windows without producer counts fall back to estimates: raw sources
    their configured event size, steps the output size of the bytes they
    consumed.
    """
    if req.stats.producer_bytes:
        return {pid: float(n) for pid, n in req.stats.producer_bytes.items()}
    logger.warning("LOCAL: window has no producer byte counts, estimating from step statistics")
    estimate: Dict[str, float] = {}
    for pid in req.graph.producer_ids:
        if req.graph.is_source(pid):
            estimate[pid] = float(req.graph.sources[pid].bytes_per_event)
        elif pid in req.stats:
            estimate[pid] = float(req.graph.step(pid).produced_bytes(req.stats[pid].bytes))
    return estimate


def solve_local(req: SolveRequest) -> SolveResult:
    """
    Locality greedy placement.

    Steps are visited in descending order of the bytes they consumed in the
    window (ties by id). Each goes to the worker already storing the largest
    share of its input bytes among workers with spare capacity, and all of
    its inputs are then written to that worker. Every worker hosts at most
    two steps regardless of its own capacity.

    Raises:
        Infeasible: If twice the worker count is below the step count
    """
    watch = Stopwatch()
    req.check_capacity(LOCAL_CODE_CAPACITY)
    problem = req.compile(capacity_override=LOCAL_CODE_CAPACITY)
    n_workers = problem.n_workers

    start_code = np.arange(problem.n_steps) % n_workers
    data = problem.default_data(start_code)
    kept = set()
    if req.previous is not None:
        for p, pid in enumerate(problem.producer_ids):
            wid = req.previous.data_loc.get(pid)
            if wid in problem.worker_index:
                data[p] = problem.worker_index[wid]
                kept.add(p)

    window_bytes = window_producer_bytes(req)
    produced = np.array([window_bytes.get(pid, 0.0) for pid in problem.producer_ids], dtype=float)
    consumed = [sum(produced[p] for p, _ in problem.inputs[s]) for s in range(problem.n_steps)]
    order = sorted(range(problem.n_steps), key=lambda s: (-consumed[s], problem.step_ids[s]))

    load = np.zeros(n_workers, dtype=int)
    code = np.full(problem.n_steps, -1, dtype=int)
    moved = set()
    for s in order:
        share = np.zeros(n_workers)
        for p, _ in problem.inputs[s]:
            share[data[p]] += produced[p]
        spare = [w for w in range(n_workers) if load[w] < problem.capacity[w]]
        best = max(spare, key=lambda w: (share[w], -w))
        if share[best] <= 0:
            best = min(spare, key=lambda w: (load[w], w))
        code[s] = best
        load[best] += 1
        for p, _ in problem.inputs[s]:
            data[p] = best
            moved.add(p)
        own = problem.self_producer[s]
        if own not in kept and own not in moved:
            data[own] = best
        logger.debug("LOCAL: %s -> %s (input share %.0f B)", problem.step_ids[s], problem.worker_ids[best], share[best])
    return result_for(problem, code, data, SolveStatus.FEASIBLE, watch)
