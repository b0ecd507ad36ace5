"""!
@file config.py
@brief Scenario configuration for the placement simulator.

A scenario bundles the flow definition, the worker set, cost parameters, the
strategy under test and the run timing. Optional per-source data size
schedules make producers change their event size during a run.

Example usage:
@code
sources, steps = diamond_flow()
config = ScenarioConfig(sources, steps, workers=(WorkerProfile("w1"), WorkerProfile("w2")),
                        strategy=Strategy.CP, eval_period_ms=1_000, run_duration_ms=10_000)
graph = config.build_graph()
@endcode
"""
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from ..cost.model import CostParams, Placement, WorkerProfile, penalty_label
from ..errors import ScenarioError
from ..flow.graph import FlowGraph, build_flow_graph
from ..flow.model import RawSource, StepDef
from ..solvers.base import Strategy
from ..solvers.genetic import GeneticParams

DEFAULT_EVAL_PERIOD_MS = 30_000.0
DEFAULT_RUN_DURATION_MS = 30 * 60_000.0
DEFAULT_BANDWIDTH_BYTES_PER_MS = 10_000.0  #!< 10 MB/s
SIM_NODE_LIMIT = 4_000                     #!< exact search budget when the scenario sets none


@dataclass(frozen=True)
class DataSizeSchedule:
    """!
    Piecewise constant event size of one raw source.

    Each point (at_ms, bytes_per_event) holds from at_ms until the next
    point. Before the first point the source's own bytes_per_event applies.
    """
    source_id: str
    points: Tuple[Tuple[float, int], ...]

    def __post_init__(self):
        points = tuple(sorted((float(t), int(b)) for t, b in self.points))
        object.__setattr__(self, "points", points)
        for at_ms, nbytes in points:
            if not 0 <= at_ms < math.inf:
                raise ValueError(f"schedule '{self.source_id}': breakpoint times must be non-negative and finite")
            if nbytes < 1:
                raise ValueError(f"schedule '{self.source_id}': bytes_per_event must be >= 1")

    def bytes_at(self, t_ms: float, default: int) -> int:
        current = default
        for at_ms, nbytes in self.points:
            if at_ms > t_ms:
                break
            current = nbytes
        return current


def strategy_label(strategy: Strategy, penalty: float = 1.0, cpu_factor: Optional[float] = None) -> str:
    """!
    Experiment label of a configuration.

    CP runs carry their penalty (CP_1_25), halved CPU runs an @cpu suffix.
    """
    label = strategy.value
    if strategy is Strategy.CP:
        label += "_" + penalty_label(penalty)
    if cpu_factor is not None and cpu_factor != 1.0:
        label += f"@cpu{cpu_factor:g}"
    return label


@dataclass(frozen=True)
class ScenarioConfig:
    """!
    Everything needed to run one simulation.

    Durations are in simulated milliseconds. initial_placement replaces the
    round-robin start placement when given.
    """
    sources: Tuple[RawSource, ...]
    steps: Tuple[StepDef, ...]
    workers: Tuple[WorkerProfile, ...]
    params: CostParams = field(default_factory=CostParams)
    strategy: Strategy = Strategy.CP
    eval_period_ms: float = DEFAULT_EVAL_PERIOD_MS
    run_duration_ms: float = DEFAULT_RUN_DURATION_MS
    seed: int = 0
    data_size_schedule: Tuple[DataSizeSchedule, ...] = ()
    initial_placement: Optional[Placement] = None
    bandwidth_bytes_per_ms: float = DEFAULT_BANDWIDTH_BYTES_PER_MS
    genetic: GeneticParams = field(default_factory=GeneticParams)
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "workers", tuple(self.workers))
        object.__setattr__(self, "data_size_schedule", tuple(self.data_size_schedule))
        if not self.workers:
            raise ScenarioError("At least one worker is required", field="workers")
        worker_ids = [w.id for w in self.workers]
        for i, wid in enumerate(worker_ids):
            if wid in worker_ids[:i]:
                raise ScenarioError(f"Duplicate worker id '{wid}'", field=f"workers[{i}].id")
        for i, source in enumerate(self.sources):
            if source.home_worker not in worker_ids:
                raise ScenarioError(f"Unknown home worker '{source.home_worker}'",
                                    field=f"sources[{i}].home_worker")
        if not 0 < self.eval_period_ms < self.run_duration_ms < math.inf:
            raise ScenarioError("eval_period_ms must be positive and shorter than a finite run_duration_ms",
                                field="eval_period_ms")
        if not 0 < self.bandwidth_bytes_per_ms < math.inf:
            raise ScenarioError("bandwidth_bytes_per_ms must be positive and finite", field="bandwidth_bytes_per_ms")
        source_ids = {s.id for s in self.sources}
        for i, schedule in enumerate(self.data_size_schedule):
            if schedule.source_id not in source_ids:
                raise ScenarioError(f"Schedule for unknown source '{schedule.source_id}'",
                                    field=f"data_size_schedule[{i}].source")
            for j, (at_ms, _) in enumerate(schedule.points):
                if at_ms > self.run_duration_ms:
                    raise ScenarioError(f"Breakpoint at {at_ms} ms is after the end of the run",
                                        field=f"data_size_schedule[{i}].points[{j}]")

    def build_graph(self) -> FlowGraph:
        return build_flow_graph(self.sources, self.steps)

    def schedule_for(self, source_id: str) -> Optional[DataSizeSchedule]:
        for schedule in self.data_size_schedule:
            if schedule.source_id == source_id:
                return schedule
        return None

    def source_bytes(self, source: RawSource, t_ms: float) -> int:
        """Event size a source emits at time t_ms"""
        schedule = self.schedule_for(source.id)
        if schedule is None:
            return int(source.bytes_per_event)
        return schedule.bytes_at(t_ms, int(source.bytes_per_event))

    @property
    def node_limit(self) -> int:
        return self.params.solver_node_limit or SIM_NODE_LIMIT

    @property
    def label(self) -> str:
        cpu = {w.cpu_factor for w in self.workers}
        return strategy_label(self.strategy, self.params.device_change_penalty,
                              cpu.pop() if len(cpu) == 1 else None)

    def with_cpu_factor(self, cpu_factor: float) -> "ScenarioConfig":
        """Copy with every worker's cpu_factor replaced"""
        return replace(self, workers=tuple(replace(w, cpu_factor=cpu_factor) for w in self.workers))

    def with_overrides(self, **changes) -> "ScenarioConfig":
        """
        Copy with top level fields replaced. penalty and time_limit_ms are
        accepted as shorthands for the matching CostParams fields.
        """
        params = self.params
        if changes.get("penalty") is not None:
            params = replace(params, device_change_penalty=changes.pop("penalty"))
        if changes.get("time_limit_ms") is not None:
            params = replace(params, solver_time_limit_ms=changes.pop("time_limit_ms"))
        changes.pop("penalty", None)
        changes.pop("time_limit_ms", None)
        cpu_factor = changes.pop("cpu_factor", None)
        updated = replace(self, params=params, **{k: v for k, v in changes.items() if v is not None})
        if cpu_factor is not None:
            updated = updated.with_cpu_factor(cpu_factor)
        return updated

