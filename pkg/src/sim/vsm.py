"""!
@file vsm.py
@brief Virtual shared memory of the simulated workers.

Every topic holds only its latest datum, stored on exactly one worker. Any
worker can read any datum; reads from another worker are remote.
"""
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

from ..flow.model import Topic


@dataclass(frozen=True)
class Datum:
    """!
    Latest value written to a topic.

    seq increases with every write to the topic so consumers can tell fresh
    data from data they already consumed.
    """
    producer: str
    topic: Topic
    bytes: int
    produced_at: float
    origin_ms: float   #!< production time of the oldest contributing raw datum
    exec_id: int
    seq: int


class VsmState:
    """!
    Per-worker topic stores.

    Writing a topic on one worker drops any older copy held elsewhere, so
    the topic -> worker relation always mirrors the data locations.
    """

    def __init__(self, worker_ids):
        self._stores: Dict[str, Dict[Topic, Datum]] = {wid: {} for wid in sorted(worker_ids)}
        self._where: Dict[Topic, str] = {}
        self._seq: Dict[Topic, int] = {}

    def write(self, worker_id: str, producer: str, topic: Topic, nbytes: int, produced_at: float,
              origin_ms: float, exec_id: int) -> Datum:
        """Store a new datum for a topic on a worker, overwriting the previous one"""
        if worker_id not in self._stores:
            raise KeyError(f"Unknown worker '{worker_id}'")
        seq = self._seq.get(topic, 0) + 1
        self._seq[topic] = seq
        datum = Datum(producer, topic, int(nbytes), produced_at, origin_ms, exec_id, seq)
        old = self._where.get(topic)
        if old is not None:
            del self._stores[old][topic]
        self._stores[worker_id][topic] = datum
        self._where[topic] = worker_id
        return datum

    def latest(self, topic: Topic) -> Optional[Tuple[str, Datum]]:
        """(worker, datum) of a topic, None before its first write"""
        worker_id = self._where.get(topic)
        if worker_id is None:
            return None
        return worker_id, self._stores[worker_id][topic]

    def move(self, topic: Topic, worker_id: str) -> Optional[Datum]:
        """Relocate a topic's datum; returns it, or None when the topic is empty"""
        current = self._where.get(topic)
        if current is None or current == worker_id:
            return None if current is None else self._stores[current][topic]
        datum = self._stores[current].pop(topic)
        self._stores[worker_id][topic] = datum
        self._where[topic] = worker_id
        return datum

    def location(self, topic: Topic) -> Optional[str]:
        return self._where.get(topic)

    def contents(self, worker_id: str) -> Dict[Topic, Datum]:
        return dict(self._stores[worker_id])

    def __iter__(self) -> Iterator[Tuple[str, Datum]]:
        for topic in sorted(self._where):
            yield self._where[topic], self._stores[self._where[topic]][topic]
