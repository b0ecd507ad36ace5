"""
Tests for the cost equations and the array form of a placement problem.
"""
import random
from dataclasses import replace

import numpy as np
import pytest

from src.cost import (
    CompiledProblem,
    CostParams,
    Placement,
    StepStats,
    WorkerProfile,
    activation_cost,
    critical_path,
    path_cost,
    path_latency,
    penalty_label,
    step_cost,
    step_latency
)
from src.errors import InvalidPlacement, MissingStats
from src.flow import FlowGraph, FlowPath, build_flow_graph, enumerate_paths, layered_flow
from tests.conftest import make_workers, uniform_stats

pytestmark = pytest.mark.cost


def local_placement(graph: FlowGraph, worker: str = "w1") -> Placement:
    return Placement({s: worker for s in graph.step_ids}, {p: worker for p in graph.producer_ids})


def test_step_latency_colocated(chain_graph: FlowGraph):
    """Test latency with every datum on the executing worker"""
    stats = StepStats("s1", read_ms=2.0, execute_ms=3.0, write_ms=1.0, bytes=3)
    latency = step_latency(stats, chain_graph.step("s1"), local_placement(chain_graph), CostParams(), chain_graph)
    assert latency == pytest.approx(6.0)


def test_step_latency_remote_input(chain_graph: FlowGraph):
    """Test a remote input multiplies its read time by alpha"""
    stats = StepStats("s1", read_ms=2.0, execute_ms=3.0, write_ms=1.0, bytes=1)
    placement = Placement({"s1": "w1", "s2": "w1", "s3": "w1"}, {"src": "w2", "s1": "w1", "s2": "w1", "s3": "w1"})
    params = CostParams(alpha=2.0, beta=1.0)
    assert step_latency(stats, chain_graph.step("s1"), placement, params, chain_graph) == pytest.approx(8.0)


def test_step_latency_per_input(diamond_graph: FlowGraph):
    """Test alpha is applied per input and beta to a remote output"""
    stats = StepStats("D", read_ms=4.0, execute_ms=4.0, write_ms=2.0, bytes=4096,
                      input_read_ms={"B": 2.0, "C": 2.0})
    placement = Placement({"A": "w1", "B": "w1", "C": "w1", "D": "w1"},
                          {"src": "w1", "A": "w1", "B": "w1", "C": "w2", "D": "w2"})
    params = CostParams(alpha=3.0, beta=2.0)
    step = diamond_graph.step("D")
    assert step_latency(stats, step, placement, params, diamond_graph) == pytest.approx(16.0)
    assert step_cost(stats, step, placement, params, diamond_graph) == pytest.approx(0.00390625)


def test_step_latency_cpu_factor(chain_graph: FlowGraph):
    """Test execute time is divided by the executing worker's cpu factor"""
    stats = StepStats("s1", read_ms=2.0, execute_ms=3.0, write_ms=1.0, bytes=1)
    profiles = {w.id: w for w in make_workers(1, cpu_factor=0.5)}
    latency = step_latency(stats, chain_graph.step("s1"), local_placement(chain_graph), CostParams(), chain_graph,
                           profiles)
    assert latency == pytest.approx(2.0 + 6.0 + 1.0)


def test_path_latency_sums_steps(chain_graph: FlowGraph):
    """Test a three step chain with latencies 6, 8 and 16"""
    stats = {
        "s1": StepStats("s1", 2.0, 3.0, 1.0, 1),
        "s2": StepStats("s2", 2.0, 3.0, 1.0, 1),
        "s3": StepStats("s3", 2.0, 10.0, 2.0, 1),
    }
    placement = Placement({"s1": "w1", "s2": "w2", "s3": "w2"},
                          {"src": "w1", "s1": "w1", "s2": "w2", "s3": "w1"})
    params = CostParams(alpha=2.0, beta=2.0)
    path = enumerate_paths(chain_graph)[0]
    latencies = [step_latency(stats[s], chain_graph.step(s), placement, params, chain_graph) for s in path.steps]
    assert latencies == pytest.approx([6.0, 8.0, 16.0])
    assert path_latency(path, stats, placement, params, chain_graph) == pytest.approx(30.0)


def test_path_missing_stats(chain_graph: FlowGraph):
    """Test a path step without statistics"""
    stats = {"s1": StepStats("s1", 2.0, 3.0, 1.0, 1), "s3": StepStats("s3", 2.0, 3.0, 1.0, 1)}
    path = enumerate_paths(chain_graph)[0]
    placement = local_placement(chain_graph)
    with pytest.raises(MissingStats) as info:
        path_latency(path, stats, placement, CostParams(), chain_graph)
    assert info.value.step_id == "s2"
    with pytest.raises(MissingStats):
        path_cost(path, stats, placement, CostParams(), chain_graph)


def test_step_cost_division(chain_graph: FlowGraph):
    """Test byte normalization and the zero byte clamp"""
    placement = local_placement(chain_graph)
    step = chain_graph.step("s1")
    assert step_cost(StepStats("s1", 2.0, 3.0, 1.0, 3), step, placement, CostParams(), chain_graph) == 2.0
    clamped = StepStats("s1", 2.0, 5.0, 1.0, 0)
    assert clamped.bytes == 1
    assert step_cost(clamped, step, placement, CostParams(), chain_graph) == 8.0


def test_step_cost_scaling(chain_graph: FlowGraph):
    """Test doubling bytes halves the step cost"""
    placement = local_placement(chain_graph)
    step = chain_graph.step("s2")
    stats = StepStats("s2", 2.0, 3.0, 1.0, 1000)
    doubled = replace(stats, bytes=2000)
    assert step_cost(doubled, step, placement, CostParams(), chain_graph) == pytest.approx(
        step_cost(stats, step, placement, CostParams(), chain_graph) / 2)


def test_path_cost_sums_steps(chain_graph: FlowGraph):
    """Test path cost is the sum of step costs"""
    stats = {
        "s1": StepStats("s1", 2.0, 3.0, 1.0, 3),
        "s2": StepStats("s2", 2.0, 5.0, 1.0, 1),
        "s3": StepStats("s3", 0.0, 0.0, 0.0, 1),
    }
    path = enumerate_paths(chain_graph)[0]
    assert path_cost(path, stats, local_placement(chain_graph), CostParams(), chain_graph) == pytest.approx(10.0)


def test_critical_path_max(diamond_graph: FlowGraph):
    """Test the critical path is the costlier diamond branch"""
    stats = dict(uniform_stats(diamond_graph, nbytes=1).steps)
    stats["C"] = StepStats("C", 2.0, 50.0, 1.0, 1)
    path, cost = critical_path(diamond_graph, stats, local_placement(diamond_graph), CostParams())
    assert path.steps == ("A", "C", "D")
    assert cost == pytest.approx(8.0 + 53.0 + 8.0)


def test_critical_path_tie(diamond_graph: FlowGraph):
    """Test equal path costs resolve to the smallest step sequence"""
    stats = uniform_stats(diamond_graph).steps
    path, _ = critical_path(diamond_graph, stats, local_placement(diamond_graph), CostParams())
    assert path.steps == ("A", "B", "D")


def test_critical_path_single():
    """Test a single path flow returns that path"""
    graph = build_flow_graph(*layered_flow(1, 2))
    path, _ = critical_path(graph, uniform_stats(graph).steps, local_placement(graph), CostParams())
    assert path.steps == ("L00S00", "L01S00")


def test_critical_path_layered():
    """Test the critical path of the 27 path fixture against brute force argmax and rescaling"""
    graph = build_flow_graph(*layered_flow(3, 3))
    rng = random.Random(5)
    stats = {
        sid: StepStats(sid, rng.uniform(1, 10), rng.uniform(1, 20), rng.uniform(1, 5), rng.randint(10, 1000))
        for sid in graph.step_ids
    }
    ids = ["w1", "w2", "w3"]
    placement = Placement({s: rng.choice(ids) for s in graph.step_ids},
                          {p: rng.choice(ids) for p in graph.producer_ids})
    params = CostParams(alpha=2.0, beta=1.5)
    paths = enumerate_paths(graph)
    costs = {p.steps: path_cost(p, stats, placement, params, graph) for p in paths}
    expected = max(sorted(costs), key=costs.get)
    path, cost = critical_path(graph, stats, placement, params)
    assert path.steps == expected
    assert cost == pytest.approx(costs[expected])

    scaled = {
        sid: replace(s, read_ms=s.read_ms * 3, execute_ms=s.execute_ms * 3, write_ms=s.write_ms * 3,
                     input_read_ms={}) for sid, s in stats.items()
    }
    assert critical_path(graph, scaled, placement, params)[0].steps == expected


def test_alpha_monotone(chain_graph: FlowGraph):
    """Test raising alpha never lowers latency with a remote input"""
    stats = StepStats("s2", 4.0, 3.0, 1.0, 1)
    placement = Placement({"s1": "w1", "s2": "w2", "s3": "w2"}, {"src": "w1", "s1": "w1", "s2": "w1", "s3": "w2"})
    step = chain_graph.step("s2")
    latencies = [step_latency(stats, step, placement, CostParams(alpha=a, beta=b), chain_graph)
                 for a, b in ((1.0, 1.0), (1.5, 1.0), (3.0, 1.0), (3.0, 2.0))]
    assert latencies == sorted(latencies)
    assert latencies[0] < latencies[-1]


def test_colocation_is_best(chain_graph: FlowGraph):
    """Test an isolated step is never faster with data away from it"""
    stats = StepStats("s1", 4.0, 3.0, 2.0, 1)
    step = chain_graph.step("s1")
    params = CostParams(alpha=1.5, beta=2.5)
    best = step_latency(stats, step, local_placement(chain_graph), params, chain_graph)
    for src in ("w1", "w2"):
        for out in ("w1", "w2"):
            placement = Placement({"s1": "w1", "s2": "w1", "s3": "w1"}, {"src": src, "s1": out, "s2": "w1", "s3": "w1"})
            assert step_latency(stats, step, placement, params, chain_graph) >= best


@pytest.mark.parametrize("download,subscribe,expected", [
    (50.0, 10.0, 60.0),
    (0.0, 0.0, 0.0),
    (120.0, 30.0, 150.0),
])
def test_activation_cost(download, subscribe, expected):
    """Test activation cost is download plus subscription time"""
    worker = WorkerProfile("w1", download_ms=download, subscribe_ms=subscribe)
    assert activation_cost(None, worker) == expected


def test_worker_io_terms():
    """Test size dependent read and write times"""
    worker = WorkerProfile("w1", base_read_ms=2.0, base_write_ms=1.0, read_ms_per_kib=1.5, write_ms_per_kib=0.5)
    assert worker.read_ms(2048) == pytest.approx(5.0)
    assert worker.write_ms(2048) == pytest.approx(2.0)
    assert worker.read_ms(0) == 2.0


@pytest.mark.parametrize("kwargs", [
    dict(id=""),
    dict(id="w1", cpu_factor=0.0),
    dict(id="w1", code_capacity=0),
    dict(id="w1", base_read_ms=0.0),
    dict(id="w1", download_ms=-1.0),
])
def test_worker_validation(kwargs):
    """Test malformed worker profiles are rejected"""
    with pytest.raises(ValueError):
        WorkerProfile(**kwargs)


def test_cost_params_validation():
    """Test penalties below one and empty budgets are rejected"""
    with pytest.raises(ValueError):
        CostParams(alpha=0.5)
    with pytest.raises(ValueError):
        CostParams(device_change_penalty=0.9)
    with pytest.raises(ValueError):
        CostParams(solver_time_limit_ms=0)
    with pytest.raises(ValueError):
        CostParams(solver_node_limit=0)
    assert CostParams().alpha == 3.0 and CostParams().beta == 3.0


@pytest.mark.parametrize("penalty,label", [(1.0, "1_0"), (1.25, "1_25"), (1.5, "1_5"), (1.75, "1_75"), (2.0, "2_0")])
def test_penalty_label(penalty, label):
    """Test penalty multipliers render as experiment labels"""
    assert penalty_label(penalty) == label


def test_placement_violations(diamond_graph: FlowGraph):
    """Test missing, unknown and over capacity assignments are reported"""
    workers = make_workers(2, capacity=2)
    placement = Placement({"A": "w1", "B": "w1", "C": "w1", "X": "w2"}, {"src": "w1", "A": "w9"})
    problems = placement.violations(diamond_graph.step_ids, diamond_graph.producer_ids, workers)
    text = "\n".join(problems)
    assert "step 'D' has no code location" in text
    assert "unknown step 'X'" in text
    assert "producer 'B' has no data location" in text
    assert "unknown worker 'w9'" in text
    assert "worker 'w1' hosts 3 steps, capacity is 2" in text
    with pytest.raises(InvalidPlacement):
        placement.validate(diamond_graph.step_ids, diamond_graph.producer_ids, workers)


def test_placement_capacity_override(diamond_graph: FlowGraph):
    """Test a capacity override replaces every worker's own capacity"""
    workers = make_workers(2, capacity=4)
    placement = Placement({"A": "w1", "B": "w1", "C": "w1", "D": "w2"}, {p: "w1" for p in diamond_graph.producer_ids})
    placement.validate(diamond_graph.step_ids, diamond_graph.producer_ids, workers)
    with pytest.raises(InvalidPlacement):
        placement.validate(diamond_graph.step_ids, diamond_graph.producer_ids, workers, capacity_override=2)


def test_placement_moves(diamond_graph: FlowGraph):
    """Test moved steps and producers relative to a previous placement"""
    before = local_placement(diamond_graph)
    after = Placement({"A": "w1", "B": "w2", "C": "w1", "D": "w2"},
                      {"src": "w1", "A": "w1", "B": "w2", "C": "w1", "D": "w1"})
    assert after.moved_steps(before) == ["B", "D"]
    assert after.moved_data(before) == ["B"]
    assert after.moved_steps(None) == []
    assert Placement.from_dict(after.to_dict()) == after


def test_step_stats_defaults():
    """Test per-input fallback, observed defaults and carried copies"""
    stats = StepStats("D", read_ms=6.0, execute_ms=2.0, write_ms=1.0, bytes=10, executions=4)
    assert stats.read_for(["B", "C"]) == {"B": 3.0, "C": 3.0}
    assert stats.observed_total_ms == 9.0
    assert stats.carried().executions == 0
    assert stats.carried().read_ms == 6.0
    recorded = replace(stats, input_read_ms={"B": 1.0, "C": 5.0})
    assert recorded.read_for(["B", "C"]) == {"B": 1.0, "C": 5.0}
    with pytest.raises(ValueError):
        StepStats("D", read_ms=-1.0, execute_ms=0.0, write_ms=0.0, bytes=1)


def test_compiled_matches_equations(diamond_graph: FlowGraph):
    """Test batch evaluation agrees with the scalar equations on random placements"""
    workers = [WorkerProfile("w1", cpu_factor=1.0), WorkerProfile("w2", cpu_factor=0.5),
               WorkerProfile("w3", cpu_factor=2.0)]
    profiles = {w.id: w for w in workers}
    rng = random.Random(11)
    stats = {
        sid: StepStats(sid, rng.uniform(1, 9), rng.uniform(1, 30), rng.uniform(1, 4), rng.randint(1, 5000))
        for sid in diamond_graph.step_ids
    }
    params = CostParams(alpha=2.5, beta=1.75)
    paths = enumerate_paths(diamond_graph)
    problem = CompiledProblem(diamond_graph, paths, stats, workers, params)
    ids = [w.id for w in workers]
    for _ in range(50):
        placement = Placement({s: rng.choice(ids) for s in diamond_graph.step_ids},
                              {p: rng.choice(ids) for p in diamond_graph.producer_ids})
        code, data = problem.from_placement(placement)
        worst, total, per_path = problem.evaluate(code, data)
        expected = [path_cost(p, stats, placement, params, diamond_graph, profiles) for p in paths]
        assert per_path[0] == pytest.approx(expected)
        assert worst[0] == pytest.approx(max(expected))
        assert total[0] == pytest.approx(sum(expected))
        assert problem.to_placement(code, data) == placement


def test_compiled_penalty(diamond_graph: FlowGraph):
    """Test only relocated steps pay the device change penalty"""
    workers = make_workers(2, capacity=4)
    stats = uniform_stats(diamond_graph, nbytes=1).steps
    previous = local_placement(diamond_graph)
    params = CostParams(alpha=1.0, beta=1.0, device_change_penalty=2.0)
    problem = CompiledProblem(diamond_graph, enumerate_paths(diamond_graph), stats, workers, params, previous)
    assert problem.penalty == 2.0
    code, data = problem.from_placement(Placement({"A": "w1", "B": "w2", "C": "w1", "D": "w1"},
                                                  {p: "w1" for p in diamond_graph.producer_ids}))
    penalized = problem.step_costs(code, data)[0]
    plain = problem.step_costs(code, data, penalized=False)[0]
    b = problem.step_index["B"]
    assert penalized[b] == pytest.approx(2.0 * plain[b])
    others = [i for i in range(problem.n_steps) if i != b]
    assert penalized[others] == pytest.approx(plain[others])

    neutral = CompiledProblem(diamond_graph, enumerate_paths(diamond_graph), stats, workers,
                              replace(params, device_change_penalty=1.0), previous)
    assert neutral.penalty == 1.0
    assert (neutral.prev_code == -1).all()


def test_compiled_capacity_and_defaults(diamond_graph: FlowGraph):
    """Test the capacity mask and the default data vector"""
    problem = CompiledProblem(diamond_graph, enumerate_paths(diamond_graph), uniform_stats(diamond_graph).steps,
                              make_workers(2, capacity=2), CostParams())
    batch = np.array([[0, 0, 1, 1], [0, 0, 0, 1], [1, 1, 1, 1]])
    assert problem.capacity_ok(batch).tolist() == [True, False, False]
    assert problem.total_capacity == 4
    data = problem.default_data([1, 0, 1, 0])
    placement = problem.to_placement([1, 0, 1, 0], data)
    assert placement.data_loc == {"A": "w2", "B": "w1", "C": "w2", "D": "w1", "src": "w1"}


def test_compiled_missing_stats(diamond_graph: FlowGraph):
    """Test compiling without statistics for every step"""
    stats = dict(uniform_stats(diamond_graph).steps)
    del stats["C"]
    with pytest.raises(MissingStats):
        CompiledProblem(diamond_graph, enumerate_paths(diamond_graph), stats, make_workers(2), CostParams())


def test_flow_path_value(diamond_graph: FlowGraph):
    """Test paths compare by their step sequence"""
    assert enumerate_paths(diamond_graph)[0] == FlowPath(("A", "B", "D"), frozenset({"src"}))
