"""
Exception hierarchy for the CEP placement toolkit.
Every error raised on purpose by the library derives from CEPError so callers
(the CLI in particular) can map failures to exit codes.
"""
from typing import Iterable, Optional, Sequence


class CEPError(Exception):
    """Base class for all toolkit errors"""
    pass


class FlowGraphError(CEPError):
    """Raised when sources and steps do not form a valid flow DAG"""
    pass


class CycleDetected(FlowGraphError):
    """Raised when topic relations between steps form a cycle"""

    def __init__(self, cycle: Sequence[str]):
        self.cycle = tuple(cycle)
        super().__init__("Cycle detected: " + " -> ".join(self.cycle + self.cycle[:1]))


class UnboundTopic(FlowGraphError):
    """Raised when a step subscribes to a topic nobody publishes"""

    def __init__(self, step_id: str, topic: str):
        self.step_id = step_id
        self.topic = topic
        super().__init__(f"Step '{step_id}' consumes topic '{topic}' which has no producer")


class DuplicateProducer(FlowGraphError):
    """Raised when two nodes publish the same topic"""

    def __init__(self, topic: str, producers: Iterable[str]):
        self.topic = topic
        self.producers = tuple(sorted(producers))
        super().__init__(f"Topic '{topic}' is published by more than one node: {', '.join(self.producers)}")


class PathExplosion(FlowGraphError):
    """Raised when path enumeration exceeds the configured cap"""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"Flow graph has more than {limit} paths")


class AmbiguousSink(FlowGraphError):
    """Raised when a flow graph has no unique last step"""

    def __init__(self, sinks: Iterable[str]):
        self.sinks = tuple(sorted(sinks))
        super().__init__(f"Expected exactly one sink step, found {len(self.sinks)}: {', '.join(self.sinks)}")


class CostModelError(CEPError):
    """Base class for cost evaluation errors"""
    pass


class MissingStats(CostModelError):
    """Raised when a path contains a step without statistics"""

    def __init__(self, step_id: str):
        self.step_id = step_id
        super().__init__(f"No statistics for step '{step_id}'")


class InvalidPlacement(CostModelError):
    """Raised when a placement breaks the assignment constraints"""
    pass


class SolverError(CEPError):
    """Base class for solver errors"""
    pass


class Infeasible(SolverError):
    """Raised when no placement satisfies the constraints"""
    pass


class InstanceTooLarge(SolverError):
    """Raised when the exhaustive oracle is asked to enumerate too much"""

    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"Instance has {size} candidate placements, oracle limit is {limit}")


class ScenarioError(CEPError):
    """
    Raised when a scenario file cannot be parsed or validated.

    Args:
        message: Description of the problem
        field: Dotted path of the offending field, if known
        line: Line number in the scenario file, if known
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class MetricsError(CEPError):
    """Base class for report building errors"""
    pass


class EmptyLog(MetricsError):
    """Raised when a report is requested for an empty event log"""
    pass
