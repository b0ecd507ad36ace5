"""
Pre-defined flow shapes.
Builders for the canonical chain, diamond and layered flows used by the
scalability benchmark and the test-suite, plus a seeded random DAG generator.
"""
import random
from typing import List, Tuple

from .model import RawSource, StepDef

FlowParts = Tuple[List[RawSource], List[StepDef]]


def chain_flow(length: int = 3, bytes_per_event: int = 64, period_ms: float = 100.0,
               home_worker: str = "w1") -> FlowParts:
    """
    One source feeding a linear chain of steps s1 -> s2 -> ... via topics t0, t1, ...
    """
    sources = [RawSource("src", "t0", bytes_per_event, period_ms, home_worker)]
    steps = [StepDef(f"s{i}", (f"t{i - 1}",), f"t{i}") for i in range(1, length + 1)]
    return sources, steps


def diamond_flow(bytes_per_event: int = 64, period_ms: float = 100.0, home_worker: str = "w1") -> FlowParts:
    """
    A -> {B, C} -> D with one source feeding A.
    """
    sources = [RawSource("src", "raw", bytes_per_event, period_ms, home_worker)]
    steps = [
        StepDef("A", ("raw",), "tA"),
        StepDef("B", ("tA",), "tB"),
        StepDef("C", ("tA",), "tC"),
        StepDef("D", ("tB", "tC"), "tD"),
    ]
    return sources, steps


def layered_flow(width: int, depth: int, bytes_per_event: int = 64, period_ms: float = 100.0,
                 workers: int = 1) -> FlowParts:
    """
    `depth` layers of `width` steps, each step consuming every output of the
    previous layer. Every first-layer step has its own raw source.

    Step ids are zero padded (L01S02) so lexicographic order follows layers.
    """
    sources = []
    steps = []
    for col in range(width):
        sources.append(RawSource(f"r{col:02d}", f"raw{col:02d}", bytes_per_event, period_ms,
                                 f"w{(col % max(1, workers)) + 1}"))
    previous = [f"raw{col:02d}" for col in range(width)]
    for layer in range(depth):
        current = []
        for col in range(width):
            sid = f"L{layer:02d}S{col:02d}"
            inputs = (previous[col],) if layer == 0 else tuple(previous)
            steps.append(StepDef(sid, inputs, f"t_{sid}"))
            current.append(f"t_{sid}")
        previous = current
    return sources, steps


def random_flow(rng: random.Random, n_steps: int, n_sources: int = 2, edge_probability: float = 0.35) -> FlowParts:
    """
    Random DAG over steps s00..sNN: each step draws its inputs from earlier
    steps (with the given probability each) and falls back to a random source
    when it drew none.
    """
    sources = [RawSource(f"r{i}", f"raw{i}", 64, 100.0, "w1") for i in range(n_sources)]
    steps = []
    for i in range(n_steps):
        inputs = [f"t{j:02d}" for j in range(i) if rng.random() < edge_probability]
        if not inputs or rng.random() < 0.2:
            inputs.append(f"raw{rng.randrange(n_sources)}")
        steps.append(StepDef(f"s{i:02d}", tuple(inputs), f"t{i:02d}"))
    return sources, steps
