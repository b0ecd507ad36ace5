"""
Test configuration and fixtures for the CEP placement toolkit.
"""
from pathlib import Path
from typing import Callable, Dict, List

import pytest

from src.cost import CostParams, StatsWindow, StepStats, WorkerProfile
from src.flow import FlowGraph, build_flow_graph, chain_flow, diamond_flow, enumerate_paths
from src.cli import load_scenario
from src.sim import ScenarioConfig
from src.solvers import SolveRequest, Strategy

REPO_ROOT = Path(__file__).resolve().parent.parent
VEHICLE_SCENARIO = REPO_ROOT / "scenarios" / "smart_vehicle.json"


def pytest_configure(config):
    """Configure pytest with custom markers"""
    config.addinivalue_line(
        "markers", "flow: mark test as flow graph test"
    )
    config.addinivalue_line(
        "markers", "cost: mark test as cost model test"
    )
    config.addinivalue_line(
        "markers", "solver: mark test as placement solver test"
    )
    config.addinivalue_line(
        "markers", "sim: mark test as simulator test"
    )
    config.addinivalue_line(
        "markers", "metrics: mark test as report and comparison test"
    )
    config.addinivalue_line(
        "markers", "cli: mark test as command line test"
    )
    config.addinivalue_line(
        "markers", "acceptance: mark test as long running experiment check"
    )


def uniform_stats(graph: FlowGraph, read_ms: float = 2.0, execute_ms: float = 5.0, write_ms: float = 1.0,
                  nbytes: int = 100) -> StatsWindow:
    """The same statistics for every step of a graph"""
    return StatsWindow(0.0, 1000.0, {
        sid: StepStats(sid, read_ms, execute_ms, write_ms, nbytes, executions=10) for sid in graph.step_ids
    })


def make_workers(count: int, capacity: int = 2, **profile) -> List[WorkerProfile]:
    """Identical workers w1..wN"""
    return [WorkerProfile(f"w{i + 1}", code_capacity=capacity, **profile) for i in range(count)]


@pytest.fixture
def diamond_graph() -> FlowGraph:
    """Provide the src -> A -> {B, C} -> D flow"""
    return build_flow_graph(*diamond_flow())


@pytest.fixture
def chain_graph() -> FlowGraph:
    """Provide a three step chain flow"""
    return build_flow_graph(*chain_flow(3))


@pytest.fixture
def workers() -> List[WorkerProfile]:
    """Provide three identical workers with capacity 2"""
    return make_workers(3)


@pytest.fixture
def params() -> CostParams:
    """Provide cost parameters with the default penalties"""
    return CostParams(alpha=3.0, beta=3.0)


@pytest.fixture
def diamond_request(diamond_graph: FlowGraph, workers: List[WorkerProfile], params: CostParams) -> SolveRequest:
    """Provide a solve request for the diamond flow on three workers"""
    return SolveRequest(diamond_graph, tuple(enumerate_paths(diamond_graph)), uniform_stats(diamond_graph),
                        tuple(workers), params)


@pytest.fixture
def vehicle_config() -> ScenarioConfig:
    """Provide the smart-vehicle scenario"""
    return load_scenario(VEHICLE_SCENARIO)


@pytest.fixture
def diamond_config() -> Callable[..., ScenarioConfig]:
    """Provide a factory of short diamond-flow scenarios"""
    def build(strategy: Strategy = Strategy.STATIC, n_workers: int = 2, **overrides) -> ScenarioConfig:
        sources, steps = diamond_flow(bytes_per_event=1024, period_ms=100.0)
        values: Dict = dict(
            sources=sources,
            steps=steps,
            workers=make_workers(n_workers),
            strategy=strategy,
            eval_period_ms=1_000.0,
            run_duration_ms=5_000.0,
        )
        values.update(overrides)
        return ScenarioConfig(**values)
    return build
