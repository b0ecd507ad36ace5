"""
Run report built from the simulator event log.
Path and last-event throughput, raw data delay, last-event latencies and the
per-window solver outcomes of one simulation.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from ..errors import EmptyLog
from ..flow.graph import FlowGraph, enumerate_paths, last_step

logger = logging.getLogger(__name__)

MS_PER_MINUTE = 60_000.0

# metrics aggregated across seeds by compare_strategies
METRIC_FIELDS = (
    "min_path_rate",
    "max_path_rate",
    "last_event_throughput",
    "max_raw_delay_ms",
    "last_event_exec_ms",
    "last_event_read_ms",
    "placement_changes",
)


@dataclass(frozen=True)
class WindowRecord:
    """Outcome of one evaluation tick"""
    window: int
    time_ms: float
    status: str
    objective: Optional[float]
    nodes: int
    changes: int
    moved_data: int


@dataclass(frozen=True)
class MetricsReport:
    """
    Metrics of one simulation run.

    Rates are executions per minute of virtual time after the warm-up
    window. path_rates sums the step rates along each path; min_path_rate
    and max_path_rate are taken over them. path_sink_rates counts sink
    executions whose provenance covers every step of the path.
    """
    label: str
    seed: int
    run_duration_ms: float
    warmup_ms: float
    sink: str
    min_path_rate: float
    max_path_rate: float
    critical_path: str
    last_event_throughput: float
    max_raw_delay_ms: float
    last_event_exec_ms: float
    last_event_read_ms: float
    sink_executions: int
    placement_changes: int
    path_rates: Dict[str, float] = field(default_factory=dict)
    path_sink_rates: Dict[str, float] = field(default_factory=dict)
    step_rates: Dict[str, float] = field(default_factory=dict)
    windows: Tuple[WindowRecord, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        raw = asdict(self)
        raw["windows"] = [asdict(w) for w in self.windows]
        return raw

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "MetricsReport":
        values = dict(raw)
        values["windows"] = tuple(WindowRecord(**w) for w in values.get("windows", ()))
        return cls(**values)

    def metric(self, name: str) -> float:
        return float(getattr(self, name))


def _closure(exec_id: int, inputs: Mapping[int, Tuple[str, Tuple[int, ...]]],
             memo: Dict[int, FrozenSet[str]]) -> FrozenSet[str]:
    """Steps whose executions contributed to an execution, itself included"""
    if exec_id in memo:
        return memo[exec_id]
    step, parents = inputs[exec_id]
    steps = {step}
    for parent in parents:
        if parent in inputs:
            steps |= _closure(parent, inputs, memo)
    memo[exec_id] = frozenset(steps)
    return memo[exec_id]


def _windows(events: Iterable[Mapping[str, Any]]) -> Tuple[WindowRecord, ...]:
    return tuple(
        WindowRecord(
            window=e["window"],
            time_ms=e["t"],
            status=e["status"],
            objective=e.get("objective"),
            nodes=e.get("nodes", 0),
            changes=e.get("changes", 0),
            moved_data=e.get("moved_data", 0),
        )
        for e in events if e["kind"] == "EvalTick"
    )


def build_report(event_log: List[Mapping[str, Any]], graph: FlowGraph, run_duration_ms: float,
                 warmup_ms: float = 0.0, label: str = "", seed: int = 0) -> MetricsReport:
    """
    Compute the run metrics from a complete event log.

    Args:
        event_log: Records written by the simulator, in processing order
        graph: Flow graph of the run
        run_duration_ms: Length of the run in virtual milliseconds
        warmup_ms: Executions completing before this time are not counted
        label: Configuration label stored in the report
        seed: Seed stored in the report

    Raises:
        EmptyLog: If the log holds no records
        AmbiguousSink: If the graph has no unique last step
    """
    if not event_log:
        raise EmptyLog("Cannot build a report from an empty event log")
    if not 0 <= warmup_ms < run_duration_ms:
        raise ValueError("warmup_ms must be within [0, run_duration_ms)")
    sink = last_step(graph).id
    minutes = (run_duration_ms - warmup_ms) / MS_PER_MINUTE

    executions = [e for e in event_log if e["kind"] == "StepExecute"]
    inputs = {e["exec_id"]: (e["step"], tuple(e["inputs"])) for e in executions}
    counted = [e for e in executions if e["t"] >= warmup_ms]

    counts = {sid: 0 for sid in graph.step_ids}
    for e in counted:
        counts[e["step"]] += 1
    step_rates = {sid: n / minutes for sid, n in counts.items()}

    paths = enumerate_paths(graph)
    path_rates = {p.label: sum(step_rates[s] for s in p.steps) for p in paths}

    sink_runs = [e for e in counted if e["step"] == sink]
    memo: Dict[int, FrozenSet[str]] = {}
    attributed = {p.label: 0 for p in paths}
    for e in sink_runs:
        contributed = _closure(e["exec_id"], inputs, memo)
        for p in paths:
            if contributed.issuperset(p.steps):
                attributed[p.label] += 1
    path_sink_rates = {k: n / minutes for k, n in attributed.items()}

    critical = min(paths, key=lambda p: (path_rates[p.label], p.steps))
    if sink_runs:
        max_delay = max(e["t"] - e["origin_ms"] for e in sink_runs)
        exec_ms = float(np.mean([e["read_ms"] + e["execute_ms"] + e["write_ms"] for e in sink_runs]))
        read_ms = float(np.mean([e["read_ms"] for e in sink_runs]))
    else:
        logger.warning("Sink step '%s' never executed after warm-up", sink)
        max_delay = exec_ms = read_ms = 0.0

    windows = _windows(event_log)
    return MetricsReport(
        label=label,
        seed=seed,
        run_duration_ms=float(run_duration_ms),
        warmup_ms=float(warmup_ms),
        sink=sink,
        min_path_rate=min(path_rates.values()),
        max_path_rate=max(path_rates.values()),
        critical_path=critical.label,
        last_event_throughput=len(sink_runs) / minutes,
        max_raw_delay_ms=float(max_delay),
        last_event_exec_ms=exec_ms,
        last_event_read_ms=read_ms,
        sink_executions=len(sink_runs),
        placement_changes=sum(w.changes for w in windows),
        path_rates=path_rates,
        path_sink_rates=path_sink_rates,
        step_rates=step_rates,
        windows=windows,
    )
