"""
Cost model value types.
Worker profiles, placements, per-window step statistics and cost parameters.
"""
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional

from ..errors import InvalidPlacement


@dataclass(frozen=True)
class WorkerProfile:
    """
    Capabilities of one worker device.

    cpu_factor scales execute latency (0.5 means half the CPU of the
    baseline device). Read and write times grow with datum size through the
    per-KiB terms.
    """
    id: str
    cpu_factor: float = 1.0
    code_capacity: int = 2
    base_read_ms: float = 1.0
    base_write_ms: float = 1.0
    download_ms: float = 0.0
    subscribe_ms: float = 0.0
    read_ms_per_kib: float = 0.0
    write_ms_per_kib: float = 0.0

    def __post_init__(self):
        if not self.id:
            raise ValueError("Worker id must be non-empty")
        if not (self.cpu_factor > 0 and math.isfinite(self.cpu_factor)):
            raise ValueError(f"worker '{self.id}': cpu_factor must be positive and finite")
        if not self.code_capacity >= 1:
            raise ValueError(f"worker '{self.id}': code_capacity must be >= 1")
        if not all(0 < x < math.inf for x in (self.base_read_ms, self.base_write_ms)):
            raise ValueError(f"worker '{self.id}': base read/write latency must be positive and finite")
        terms = (self.download_ms, self.subscribe_ms, self.read_ms_per_kib, self.write_ms_per_kib)
        if not all(0 <= x < math.inf for x in terms):
            raise ValueError(f"worker '{self.id}': latency terms must be non-negative and finite")

    def read_ms(self, nbytes: int) -> float:
        """Local read time of a datum of the given size"""
        return self.base_read_ms + nbytes / 1024.0 * self.read_ms_per_kib

    def write_ms(self, nbytes: int) -> float:
        """Local write time of a datum of the given size"""
        return self.base_write_ms + nbytes / 1024.0 * self.write_ms_per_kib


@dataclass(frozen=True)
class Placement:
    """
    Joint code and data assignment.

    code_loc maps each step to the worker executing it, data_loc maps each
    producer (raw source or step) to the worker storing its output.
    """
    code_loc: Mapping[str, str]
    data_loc: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "code_loc", dict(sorted(self.code_loc.items())))
        object.__setattr__(self, "data_loc", dict(sorted(self.data_loc.items())))

    def load(self) -> Counter:
        """Number of steps hosted per worker"""
        return Counter(self.code_loc.values())

    def violations(self, step_ids: Iterable[str], producer_ids: Iterable[str],
                   workers: Iterable["WorkerProfile"], capacity_override: Optional[int] = None) -> List[str]:
        """
        List every broken assignment constraint.

        Args:
            step_ids: Steps that must each have exactly one code location
            producer_ids: Producers that must each have exactly one data location
            workers: Available workers and their capacities
            capacity_override: Capacity to use for every worker instead of its own

        Returns:
            Human readable violations, empty when the placement is valid
        """
        profiles = {w.id: w for w in workers}
        problems = []
        step_ids = set(step_ids)
        producer_ids = set(producer_ids)
        for sid in sorted(step_ids - set(self.code_loc)):
            problems.append(f"step '{sid}' has no code location")
        for sid in sorted(set(self.code_loc) - step_ids):
            problems.append(f"unknown step '{sid}' in code locations")
        for pid in sorted(producer_ids - set(self.data_loc)):
            problems.append(f"producer '{pid}' has no data location")
        for pid in sorted(set(self.data_loc) - producer_ids):
            problems.append(f"unknown producer '{pid}' in data locations")
        for node, wid in list(self.code_loc.items()) + list(self.data_loc.items()):
            if wid not in profiles:
                problems.append(f"'{node}' is assigned to unknown worker '{wid}'")
        for wid, count in sorted(self.load().items()):
            if wid in profiles:
                cap = capacity_override if capacity_override is not None else profiles[wid].code_capacity
                if count > cap:
                    problems.append(f"worker '{wid}' hosts {count} steps, capacity is {cap}")
        return problems

    def validate(self, step_ids: Iterable[str], producer_ids: Iterable[str],
                 workers: Iterable["WorkerProfile"], capacity_override: Optional[int] = None) -> None:
        """
        Raises:
            InvalidPlacement: If any assignment constraint is broken
        """
        problems = self.violations(step_ids, producer_ids, workers, capacity_override)
        if problems:
            raise InvalidPlacement("; ".join(problems))

    def moved_steps(self, previous: Optional["Placement"]) -> List[str]:
        """Steps whose code location differs from a previous placement"""
        if previous is None:
            return []
        return [s for s, w in self.code_loc.items() if previous.code_loc.get(s, w) != w]

    def moved_data(self, previous: Optional["Placement"]) -> List[str]:
        """Producers whose data location differs from a previous placement"""
        if previous is None:
            return []
        return [p for p, w in self.data_loc.items() if previous.data_loc.get(p, w) != w]

    def to_dict(self) -> Dict[str, Dict[str, str]]:
        return {"code_loc": dict(self.code_loc), "data_loc": dict(self.data_loc)}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Mapping[str, str]]) -> "Placement":
        return cls(dict(raw["code_loc"]), dict(raw["data_loc"]))


@dataclass(frozen=True)
class StepStats:
    """
    Statistics of one step over one evaluation window.

    read_ms, write_ms and input_read_ms are local-equivalent mean latencies
    (what the step sees with colocated data); execute_ms is normalized to
    cpu_factor 1.0. The observed_* fields hold the measured means including
    remote penalties and cpu scaling.
    """
    step_id: str
    read_ms: float
    execute_ms: float
    write_ms: float
    bytes: int
    executions: int = 0
    input_read_ms: Mapping[str, float] = field(default_factory=dict)
    observed_read_ms: Optional[float] = None
    observed_execute_ms: Optional[float] = None
    observed_write_ms: Optional[float] = None

    def __post_init__(self):
        if min(self.read_ms, self.execute_ms, self.write_ms) < 0:
            raise ValueError(f"step '{self.step_id}': latencies must be non-negative")
        if self.executions < 0:
            raise ValueError(f"step '{self.step_id}': executions must be non-negative")
        # zero-byte windows would make the step cost undefined
        object.__setattr__(self, "bytes", max(1, int(self.bytes)))
        object.__setattr__(self, "input_read_ms", dict(self.input_read_ms))
        for name, local in (("observed_read_ms", self.read_ms), ("observed_execute_ms", self.execute_ms),
                            ("observed_write_ms", self.write_ms)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, local)

    def read_for(self, producer_ids: Iterable[str]) -> Dict[str, float]:
        """
        Local read time per input producer.

        Falls back to splitting read_ms evenly when per-input values were not
        recorded.
        """
        producer_ids = list(producer_ids)
        if self.input_read_ms and all(p in self.input_read_ms for p in producer_ids):
            return {p: self.input_read_ms[p] for p in producer_ids}
        share = self.read_ms / len(producer_ids) if producer_ids else 0.0
        return {p: share for p in producer_ids}

    @property
    def observed_total_ms(self) -> float:
        return self.observed_read_ms + self.observed_execute_ms + self.observed_write_ms

    def carried(self) -> "StepStats":
        """Copy used when a window had no executions of this step"""
        return replace(self, executions=0)


@dataclass(frozen=True)
class StatsWindow:
    """Statistics snapshot for one evaluation window"""
    start_ms: float
    end_ms: float
    steps: Mapping[str, StepStats]
    producer_bytes: Mapping[str, int] = field(default_factory=dict)
    producer_events: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "steps", dict(sorted(self.steps.items())))
        object.__setattr__(self, "producer_bytes", dict(sorted(self.producer_bytes.items())))
        object.__setattr__(self, "producer_events", dict(sorted(self.producer_events.items())))

    def __getitem__(self, step_id: str) -> StepStats:
        return self.steps[step_id]

    def __contains__(self, step_id: str) -> bool:
        return step_id in self.steps


@dataclass(frozen=True)
class CostParams:
    """
    Penalties and solver budgets.

    alpha and beta multiply remote read and write latency; the device change
    penalty multiplies the cost of a step relocated away from its previous
    worker during exact search.
    """
    alpha: float = 3.0
    beta: float = 3.0
    device_change_penalty: float = 1.0
    solver_time_limit_ms: int = 10_000
    solver_node_limit: Optional[int] = None

    def __post_init__(self):
        for name in ("alpha", "beta", "device_change_penalty"):
            if not 1.0 <= getattr(self, name) < math.inf:
                raise ValueError(f"{name} must be finite and >= 1.0, got {getattr(self, name)}")
        if not 0 < self.solver_time_limit_ms < math.inf:
            raise ValueError(f"solver_time_limit_ms must be positive and finite, got {self.solver_time_limit_ms}")
        if self.solver_node_limit is not None and not 0 < self.solver_node_limit < math.inf:
            raise ValueError("solver_node_limit must be positive when set")


def penalty_label(penalty: float) -> str:
    """Render a penalty multiplier the way experiment labels spell it (1.25 -> '1_25')"""
    text = f"{penalty:.2f}".rstrip("0")
    if text.endswith("."):
        text += "0"
    return text.replace(".", "_")
