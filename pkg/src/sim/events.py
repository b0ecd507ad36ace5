"""!
@file events.py
@brief Simulation events and the future event list.

Events are ordered by time; events scheduled for the same time are
processed in insertion order.
"""
import heapq
import json
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, TextIO


class EventKind(Enum):
    """!
    Kinds of simulation events.
    - SENSOR_EMIT: a raw source produces an event on its home worker
    - DATA_WRITTEN: a raw event finished writing to its storage worker
    - STEP_EXECUTE: a step execution completed and wrote its output
    - EVAL_TICK: the manager closes a window and re-plans
    - MIGRATION_COMPLETE: a relocated step becomes active again
    """
    SENSOR_EMIT = "SensorEmit"
    DATA_WRITTEN = "DataWritten"
    STEP_EXECUTE = "StepExecute"
    EVAL_TICK = "EvalTick"
    MIGRATION_COMPLETE = "MigrationComplete"


@dataclass(frozen=True)
class SimEvent:
    """!
    One scheduled event.

    payload holds kind-specific fields: source or step id, bytes, the
    execution id and the provenance timestamp of the oldest raw datum.
    """
    time: float
    kind: EventKind
    payload: Dict[str, Any] = field(default_factory=dict)


class EventQueue:
    """!
    Future event list backed by a binary heap keyed on (time, insertion order).
    """

    def __init__(self):
        self._heap: List[tuple] = []
        self._counter = itertools.count()

    def push(self, event: SimEvent) -> None:
        if event.time < 0:
            raise ValueError(f"Event time must be non-negative, got {event.time}")
        heapq.heappush(self._heap, (event.time, next(self._counter), event))

    def schedule(self, time: float, kind: EventKind, **payload) -> SimEvent:
        event = SimEvent(time, kind, payload)
        self.push(event)
        return event

    def pop(self) -> SimEvent:
        return heapq.heappop(self._heap)[2]

    def peek_time(self) -> Optional[float]:
        return self._heap[0][0] if self._heap else None

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)


def dump_event_log(records: Iterable[Dict[str, Any]], stream: TextIO) -> None:
    """!
    Write event records as JSON Lines with sorted keys.
    """
    for record in records:
        stream.write(json.dumps(record, sort_keys=True) + "\n")


def load_event_log(stream: TextIO) -> List[Dict[str, Any]]:
    return [json.loads(line) for line in stream if line.strip()]
