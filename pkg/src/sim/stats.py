"""!
@file stats.py
@brief Per-window step statistics gathered by the simulated manager.

Execution records carry both the latency a step observed and its
local-equivalent counterpart (no remote penalty, baseline CPU) so the
solvers can re-apply penalties for any candidate placement.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from ..cost.model import Placement, StatsWindow, StepStats, WorkerProfile
from ..flow.graph import FlowGraph


@dataclass(frozen=True)
class ExecutionRecord:
    """!
    One completed step execution.

    local_read_ms maps each input producer to its read time had the datum
    been local; read_ms holds the observed (possibly remote) read times.
    """
    exec_id: int
    step_id: str
    worker_id: str
    start_ms: float
    end_ms: float
    bytes_in: int
    bytes_out: int
    local_read_ms: Mapping[str, float]
    read_ms: Mapping[str, float]
    execute_ms: float            #!< at cpu_factor 1.0
    observed_execute_ms: float
    write_ms: float              #!< local write
    observed_write_ms: float
    input_exec_ids: Tuple[int, ...] = ()
    origin_ms: float = 0.0

    @property
    def total_read_ms(self) -> float:
        return sum(self.read_ms.values())

    @property
    def total_local_read_ms(self) -> float:
        return sum(self.local_read_ms.values())

    @property
    def latency_ms(self) -> float:
        return self.total_read_ms + self.observed_execute_ms + self.observed_write_ms


def _mean(values: List[float]) -> float:
    return float(np.mean(values))


def summarize(step_id: str, records: List[ExecutionRecord]) -> StepStats:
    """Mean latencies and total consumed bytes of a step's executions"""
    producers = sorted(records[0].local_read_ms)
    return StepStats(
        step_id=step_id,
        read_ms=_mean([r.total_local_read_ms for r in records]),
        execute_ms=_mean([r.execute_ms for r in records]),
        write_ms=_mean([r.write_ms for r in records]),
        bytes=sum(r.bytes_in for r in records),
        executions=len(records),
        input_read_ms={p: _mean([r.local_read_ms[p] for r in records]) for p in producers},
        observed_read_ms=_mean([r.total_read_ms for r in records]),
        observed_execute_ms=_mean([r.observed_execute_ms for r in records]),
        observed_write_ms=_mean([r.observed_write_ms for r in records]),
    )


def collect_window_stats(records: Iterable[ExecutionRecord], graph: FlowGraph, start_ms: float, end_ms: float,
                         previous: Optional[StatsWindow], prior: StatsWindow,
                         producer_bytes: Optional[Mapping[str, int]] = None,
                         producer_events: Optional[Mapping[str, int]] = None) -> StatsWindow:
    """!
    Statistics of the executions that completed within [start_ms, end_ms).

    Steps without executions in the window carry forward their statistics
    from the previous window, or from the prior estimate before their first
    execution.

    @param records Completed executions; those outside the window are ignored
    @param previous Statistics of the previous window, if any
    @param prior Analytic estimate used for steps that never executed
    @param producer_bytes Bytes written per producer during the window
    @param producer_events Writes per producer during the window
    """
    grouped: Dict[str, List[ExecutionRecord]] = {}
    for record in records:
        if start_ms <= record.end_ms < end_ms:
            grouped.setdefault(record.step_id, []).append(record)
    steps: Dict[str, StepStats] = {}
    for sid in graph.step_ids:
        if sid in grouped:
            steps[sid] = summarize(sid, grouped[sid])
        elif previous is not None and sid in previous:
            steps[sid] = previous[sid].carried()
        else:
            steps[sid] = prior[sid]
    return StatsWindow(start_ms, end_ms, steps, dict(producer_bytes or {}), dict(producer_events or {}))


def prior_window_stats(graph: FlowGraph, workers: Mapping[str, WorkerProfile], placement: Placement,
                       eval_period_ms: float, source_bytes: Mapping[str, int]) -> StatsWindow:
    """!
    Analytic statistics for a window in which nothing has executed yet.

    Event sizes are propagated from the sources through the steps' output
    sizes; a step fires at the rate of its slowest input. Latencies use the
    profile of the worker hosting the step in the given placement.
    """
    sizes: Dict[str, int] = dict(source_bytes)
    rates: Dict[str, float] = {sid: 1.0 / s.period_ms for sid, s in graph.sources.items()}
    steps: Dict[str, StepStats] = {}
    produced: Dict[str, int] = {}
    for sid in graph.topological_steps():
        step = graph.step(sid)
        inputs = graph.inputs_of(sid)
        worker = workers[placement.code_loc[sid]]
        bytes_in = sum(sizes[p] for p in inputs)
        sizes[sid] = step.produced_bytes(bytes_in)
        rates[sid] = min(rates[p] for p in inputs)
        executions = rates[sid] * eval_period_ms
        reads = {p: worker.read_ms(sizes[p]) for p in inputs}
        steps[sid] = StepStats(
            step_id=sid,
            read_ms=sum(reads.values()),
            execute_ms=step.compute_ms(bytes_in),
            write_ms=worker.write_ms(sizes[sid]),
            bytes=int(round(executions * bytes_in)),
            input_read_ms=reads,
        )
    for pid in graph.producer_ids:
        produced[pid] = int(round(rates[pid] * eval_period_ms * sizes[pid]))
    return StatsWindow(0.0, 0.0, steps, produced, {})
