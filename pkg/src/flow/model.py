"""
Flow model value types.
Raw sources, steps and paths of a CEP flow, linked by publish/subscribe topics.
"""
import math
from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple

Topic = str


def _check_topic(topic: Topic, owner: str) -> None:
    if not isinstance(topic, str) or not topic:
        raise ValueError(f"{owner}: topic names must be non-empty strings, got {topic!r}")


@dataclass(frozen=True)
class RawSource:
    """
    A sensor application that periodically publishes raw data.

    The source process always runs on its home worker; only the location
    its output is written to can be placed.
    """
    id: str
    output_topic: Topic
    bytes_per_event: int
    period_ms: float
    home_worker: str
    label: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("Raw source id must be non-empty")
        _check_topic(self.output_topic, f"source '{self.id}'")
        if int(self.bytes_per_event) < 1:
            raise ValueError(f"source '{self.id}': bytes_per_event must be >= 1")
        if not 0 < self.period_ms < math.inf:
            raise ValueError(f"source '{self.id}': period_ms must be positive and finite")
        if not self.home_worker:
            raise ValueError(f"source '{self.id}': home_worker is required")


@dataclass(frozen=True)
class StepDef:
    """
    One CEP step: the topics it waits on, its action profile and its output topic.

    Execute latency on a baseline worker is fixed_ms + per_byte_ms * input_bytes;
    workers scale it by their cpu_factor.
    """
    id: str
    input_topics: Tuple[Topic, ...]
    output_topic: Topic
    fixed_ms: float = 1.0
    per_byte_ms: float = 0.0
    output_bytes: Optional[int] = None
    label: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("Step id must be non-empty")
        # normalized to a sorted tuple so equal steps compare equal
        topics = tuple(sorted(set(self.input_topics)))
        object.__setattr__(self, "input_topics", topics)
        if not topics:
            raise ValueError(f"step '{self.id}': at least one input topic is required")
        for topic in topics:
            _check_topic(topic, f"step '{self.id}'")
        _check_topic(self.output_topic, f"step '{self.id}'")
        if self.output_topic in topics:
            raise ValueError(f"step '{self.id}': output topic '{self.output_topic}' is also an input")
        if not (0 <= self.fixed_ms < math.inf and 0 <= self.per_byte_ms < math.inf):
            raise ValueError(f"step '{self.id}': compute profile must be non-negative and finite")
        if self.output_bytes is not None and int(self.output_bytes) < 1:
            raise ValueError(f"step '{self.id}': output_bytes must be >= 1")

    def compute_ms(self, input_bytes: int) -> float:
        """Execute latency at cpu_factor 1.0 for the given consumed bytes"""
        return self.fixed_ms + self.per_byte_ms * input_bytes

    def produced_bytes(self, input_bytes: int) -> int:
        """Size of the output datum for the given consumed bytes"""
        if self.output_bytes is not None:
            return int(self.output_bytes)
        return max(1, int(input_bytes))


@dataclass(frozen=True)
class FlowPath:
    """
    A simple path of steps from a source-adjacent step to a sink step.

    sources holds the raw sources feeding the first step; delay metrics are
    measured from their production time.
    """
    steps: Tuple[str, ...]
    sources: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.steps:
            raise ValueError("A path needs at least one step")
        if len(set(self.steps)) != len(self.steps):
            raise ValueError(f"Path repeats a step: {self.steps}")

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def label(self) -> str:
        return ">".join(self.steps)
