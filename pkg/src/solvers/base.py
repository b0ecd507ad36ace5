"""
Common solver types.
Strategies, solve requests and results shared by every placement strategy.
"""
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from ..cost.compiled import CompiledProblem
from ..cost.model import CostParams, Placement, StatsWindow, WorkerProfile
from ..errors import Infeasible
from ..flow.graph import FlowGraph
from ..flow.model import FlowPath


class Strategy(Enum):
    """Placement strategies the manager can run every evaluation window"""
    CP = "CP"          # exact branch-and-bound search
    GA = "GA"          # genetic algorithm
    CRRB = "CRRB"      # complete round-robin
    RANDOM = "RANDOM"  # balanced random, decided once
    LOCAL = "LOCAL"    # locality greedy
    STATIC = "STATIC"  # keep the initial placement


class SolveStatus(Enum):
    OPTIMAL = "Optimal"
    FEASIBLE_TIME_LIMIT = "FeasibleTimeLimit"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class SolveRequest:
    """
    Everything a strategy needs to decide one placement.

    Attributes:
        graph: Validated flow graph
        paths: Enumerated source-to-sink paths of the graph
        stats: Statistics of the window just closed
        workers: Available workers
        params: Penalties and search budgets
        previous: Placement currently in force, if any
        seed: Seed for randomized strategies
    """
    graph: FlowGraph
    paths: Tuple[FlowPath, ...]
    stats: StatsWindow
    workers: Tuple[WorkerProfile, ...]
    params: CostParams = field(default_factory=CostParams)
    previous: Optional[Placement] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        object.__setattr__(self, "workers", tuple(sorted(self.workers, key=lambda w: w.id)))
        if not self.workers:
            raise ValueError("At least one worker is required")
        ids = [w.id for w in self.workers]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Duplicate worker ids: {ids}")
        if not self.paths:
            raise ValueError("At least one path is required")

    @property
    def total_capacity(self) -> int:
        return sum(w.code_capacity for w in self.workers)

    def compile(self, capacity_override: Optional[int] = None) -> CompiledProblem:
        return CompiledProblem(self.graph, self.paths, self.stats, self.workers, self.params,
                               self.previous, capacity_override)

    def check_capacity(self, capacity_override: Optional[int] = None) -> None:
        """
        Raises:
            Infeasible: If the workers cannot host every step
        """
        n_steps = len(self.graph.step_ids)
        if capacity_override is not None:
            total = capacity_override * len(self.workers)
        else:
            total = self.total_capacity
        if total < n_steps:
            raise Infeasible(f"{n_steps} steps do not fit on {len(self.workers)} workers "
                             f"with total code capacity {total}")


@dataclass(frozen=True)
class SolveResult:
    """
    Outcome of one strategy invocation.

    Attributes:
        placement: The chosen placement, None only when infeasible
        objective: Max path cost under the placement (penalty weighted for CP)
        status: How the search ended
        elapsed_ms: Wall time spent in the search
        first_feasible_ms: Wall time until the first valid placement was known
        nodes: Search nodes visited or individuals evaluated
        tie_break: Sum of path costs of the placement
        trace: Best fitness per generation (genetic algorithm only)
    """
    placement: Optional[Placement]
    objective: float
    status: SolveStatus
    elapsed_ms: int
    first_feasible_ms: Optional[int] = None
    nodes: int = 0
    tie_break: float = 0.0
    trace: Tuple[float, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.status is not SolveStatus.INFEASIBLE

    @classmethod
    def infeasible(cls, elapsed_ms: int = 0) -> "SolveResult":
        return cls(None, float("inf"), SolveStatus.INFEASIBLE, elapsed_ms)


class Stopwatch:
    """Millisecond wall clock for solver budgets"""

    def __init__(self, limit_ms: Optional[float] = None):
        self._start = time.perf_counter()
        self.limit_ms = limit_ms

    def elapsed(self) -> float:
        return (time.perf_counter() - self._start) * 1000.0

    def elapsed_ms(self) -> int:
        return int(self.elapsed())

    def expired(self) -> bool:
        return self.limit_ms is not None and self.elapsed() >= self.limit_ms


def result_for(problem: CompiledProblem, code: Sequence[int], data: Sequence[int], status: SolveStatus,
               watch: Stopwatch, penalized: bool = False, **extra) -> SolveResult:
    """Evaluate a final candidate and wrap it into a SolveResult"""
    code = np.asarray(code, dtype=int)
    data = np.asarray(data, dtype=int)
    worst, total, _ = problem.evaluate(code, data, penalized=penalized)
    extra.setdefault("first_feasible_ms", watch.elapsed_ms())
    return SolveResult(
        placement=problem.to_placement(code, data),
        objective=float(worst[0]),
        status=status,
        elapsed_ms=watch.elapsed_ms(),
        tie_break=float(total[0]),
        **extra,
    )
