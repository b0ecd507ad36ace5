"""
Flow graph construction and path decomposition.
Builds the DAG induced by topic publish/subscribe relations and enumerates its
source-to-sink step paths.
"""
import logging
from typing import Dict, Iterable, List, Mapping, Tuple

import networkx as nx

from ..errors import AmbiguousSink, CycleDetected, DuplicateProducer, FlowGraphError, PathExplosion, UnboundTopic
from .model import FlowPath, RawSource, StepDef, Topic

logger = logging.getLogger(__name__)

DEFAULT_PATH_LIMIT = 10_000


class FlowGraph:
    """
    Immutable DAG of raw sources and steps.

    Edges run from the producer of a topic to every step subscribed to it.
    All accessors return tuples in sorted order so downstream results are
    deterministic.
    """

    def __init__(self, sources: Mapping[str, RawSource], steps: Mapping[str, StepDef],
                 topic_producer: Mapping[Topic, str], digraph: nx.DiGraph):
        self._sources: Dict[str, RawSource] = dict(sorted(sources.items()))
        self._steps: Dict[str, StepDef] = dict(sorted(steps.items()))
        self._topic_producer: Dict[Topic, str] = dict(topic_producer)
        self._g = nx.freeze(digraph)
        self._inputs = {
            sid: tuple(self._topic_producer[t] for t in step.input_topics)
            for sid, step in self._steps.items()
        }
        self._consumers = {
            node: tuple(sorted(self._g.successors(node))) for node in self._g.nodes
        }

    @property
    def sources(self) -> Dict[str, RawSource]:
        return dict(self._sources)

    @property
    def steps(self) -> Dict[str, StepDef]:
        return dict(self._steps)

    @property
    def digraph(self) -> nx.DiGraph:
        """Frozen networkx view of the flow"""
        return self._g

    @property
    def step_ids(self) -> Tuple[str, ...]:
        return tuple(self._steps)

    @property
    def source_ids(self) -> Tuple[str, ...]:
        return tuple(self._sources)

    @property
    def producer_ids(self) -> Tuple[str, ...]:
        """Every node that writes data: raw sources and steps, sorted by id"""
        return tuple(sorted(list(self._sources) + list(self._steps)))

    @property
    def edges(self) -> Tuple[Tuple[str, str], ...]:
        return tuple(sorted(self._g.edges))

    def step(self, step_id: str) -> StepDef:
        return self._steps[step_id]

    def is_source(self, node_id: str) -> bool:
        return node_id in self._sources

    def producer_of(self, topic: Topic) -> str:
        return self._topic_producer[topic]

    def output_topic(self, producer_id: str) -> Topic:
        if producer_id in self._sources:
            return self._sources[producer_id].output_topic
        return self._steps[producer_id].output_topic

    def inputs_of(self, step_id: str) -> Tuple[str, ...]:
        """Producer ids of a step's inputs, in input-topic order"""
        return self._inputs[step_id]

    def consumers_of(self, producer_id: str) -> Tuple[str, ...]:
        return self._consumers[producer_id]

    def feeding_sources(self, step_id: str) -> frozenset:
        """Raw sources consumed directly by a step"""
        return frozenset(p for p in self._inputs[step_id] if p in self._sources)

    def source_adjacent_steps(self) -> Tuple[str, ...]:
        return tuple(s for s in self._steps if self.feeding_sources(s))

    def sink_steps(self) -> Tuple[str, ...]:
        return tuple(s for s in self._steps if not self._consumers[s])

    def topological_steps(self) -> Tuple[str, ...]:
        order = nx.lexicographical_topological_sort(self._g)
        return tuple(n for n in order if n in self._steps)

    def __repr__(self) -> str:
        return f"FlowGraph(sources={len(self._sources)}, steps={len(self._steps)}, edges={self._g.number_of_edges()})"


def build_flow_graph(sources: Iterable[RawSource], steps: Iterable[StepDef]) -> FlowGraph:
    """
    Build and validate the flow DAG from sources and steps.

    Args:
        sources: Raw data producers
        steps: CEP steps

    Returns:
        The validated flow graph

    Raises:
        DuplicateProducer: If a topic has more than one publisher
        UnboundTopic: If a step consumes a topic with no publisher
        CycleDetected: If the topic relations are cyclic
        FlowGraphError: On duplicate node ids or empty flows
    """
    sources = sorted(sources, key=lambda s: s.id)
    steps = sorted(steps, key=lambda s: s.id)
    if not steps:
        raise FlowGraphError("A flow needs at least one step")

    node_ids = [s.id for s in sources] + [s.id for s in steps]
    duplicates = sorted({n for n in node_ids if node_ids.count(n) > 1})
    if duplicates:
        raise FlowGraphError(f"Duplicate node ids: {', '.join(duplicates)}")

    publishers: Dict[Topic, List[str]] = {}
    for node in list(sources) + list(steps):
        publishers.setdefault(node.output_topic, []).append(node.id)
    for topic, owners in sorted(publishers.items()):
        if len(owners) > 1:
            raise DuplicateProducer(topic, owners)
    topic_producer = {topic: owners[0] for topic, owners in publishers.items()}

    g = nx.DiGraph()
    for source in sources:
        g.add_node(source.id, kind="source")
    for step in steps:
        g.add_node(step.id, kind="step")
    for step in steps:
        for topic in step.input_topics:
            if topic not in topic_producer:
                raise UnboundTopic(step.id, topic)
            g.add_edge(topic_producer[topic], step.id, topic=topic)

    if not nx.is_directed_acyclic_graph(g):
        cycle_edges = nx.find_cycle(g)
        raise CycleDetected([u for u, _ in cycle_edges])

    graph = FlowGraph({s.id: s for s in sources}, {s.id: s for s in steps}, topic_producer, g)
    logger.debug("Built %r", graph)
    return graph


def enumerate_paths(graph: FlowGraph, limit: int = DEFAULT_PATH_LIMIT) -> List[FlowPath]:
    """
    Enumerate every simple path from each source-adjacent step to each sink.

    Paths contain step ids only and are returned in lexicographic order of
    their step sequences.

    Raises:
        PathExplosion: If more than `limit` paths exist
    """
    step_view = graph.digraph.subgraph(graph.step_ids)
    sinks = graph.sink_steps()
    found: List[Tuple[str, ...]] = []
    for start in graph.source_adjacent_steps():
        for sink in sinks:
            if start == sink:
                candidates = [[start]]
            else:
                candidates = nx.all_simple_paths(step_view, start, sink)
            for path in candidates:
                found.append(tuple(path))
                if len(found) > limit:
                    raise PathExplosion(limit)
    found.sort()
    return [FlowPath(steps, graph.feeding_sources(steps[0])) for steps in found]


def last_step(graph: FlowGraph) -> StepDef:
    """
    Return the unique sink step at which all paths end.

    Raises:
        AmbiguousSink: If the graph has more than one sink step
    """
    sinks = graph.sink_steps()
    if len(sinks) != 1:
        raise AmbiguousSink(sinks)
    return graph.step(sinks[0])
