"""
Tests for run reports and cross-seed strategy comparison.
"""
import csv
import json

import pytest

from src.errors import AmbiguousSink, EmptyLog
from src.flow import FlowGraph, RawSource, StepDef, build_flow_graph, enumerate_paths
from src.metrics import (
    METRIC_FIELDS,
    MetricsReport,
    build_report,
    compare_strategies,
    comparison_columns,
    write_comparison_csv,
    write_comparison_json
)
from src.sim import Simulator
from src.solvers import Strategy
from tests.oracles.replay import replay_report

pytestmark = pytest.mark.metrics


def execute(t, step, exec_id, inputs=(), origin=0.0, read=1.0, execute_ms=2.0, write=1.0):
    return {"kind": "StepExecute", "t": t, "step": step, "exec_id": exec_id, "inputs": list(inputs),
            "origin_ms": origin, "read_ms": read, "execute_ms": execute_ms, "write_ms": write}


def diamond_log():
    """Two complete diamond rounds, the first before warm-up ends"""
    log = []
    for k, base in enumerate((100.0, 70_000.0)):
        n = 10 * k
        log += [
            execute(base + 1, "A", n + 1, origin=base),
            execute(base + 2, "B", n + 2, [n + 1], origin=base),
            execute(base + 3, "C", n + 3, [n + 1], origin=base),
            execute(base + 9, "D", n + 4, [n + 2, n + 3], origin=base, read=4.0),
        ]
    log.append({"kind": "EvalTick", "t": 60_000.0, "window": 1, "status": "Optimal", "objective": 0.5,
                "nodes": 12, "changes": 2, "moved_data": 1})
    return log


def test_report_rates(diamond_graph: FlowGraph):
    """Test rates count executions after warm-up per minute"""
    report = build_report(diamond_log(), diamond_graph, 180_000.0, warmup_ms=60_000.0, label="CP_1_0", seed=3)
    assert report.sink == "D"
    assert report.step_rates == {"A": 0.5, "B": 0.5, "C": 0.5, "D": 0.5}
    assert report.path_rates == {"A>B>D": 1.5, "A>C>D": 1.5}
    assert report.min_path_rate == report.max_path_rate == 1.5
    assert report.critical_path == "A>B>D"
    assert report.last_event_throughput == 0.5
    assert report.sink_executions == 1
    assert report.max_raw_delay_ms == 9.0
    assert report.last_event_exec_ms == 7.0
    assert report.last_event_read_ms == 4.0
    assert report.placement_changes == 2
    assert report.path_sink_rates == {"A>B>D": 0.5, "A>C>D": 0.5}
    assert report.windows[0].nodes == 12
    assert (report.label, report.seed) == ("CP_1_0", 3)


def test_report_provenance(diamond_graph: FlowGraph):
    """Test sink executions count only for paths their inputs came through"""
    log = [
        execute(10.0, "A", 1),
        execute(11.0, "B", 2, [1]),
        execute(12.0, "D", 3, [2, 99]),
    ]
    report = build_report(log, diamond_graph, 60_000.0)
    assert report.path_sink_rates == {"A>B>D": 1.0, "A>C>D": 0.0}
    assert report.critical_path == "A>C>D"


def test_report_without_sink_runs(diamond_graph: FlowGraph):
    """Test a log where the sink never ran"""
    report = build_report([execute(1.0, "A", 1)], diamond_graph, 60_000.0)
    assert report.sink_executions == 0
    assert report.max_raw_delay_ms == 0.0
    assert report.last_event_exec_ms == 0.0


def test_report_errors(diamond_graph: FlowGraph):
    """Test empty logs, bad warm-up and graphs without a single sink"""
    with pytest.raises(EmptyLog):
        build_report([], diamond_graph, 1_000.0)
    with pytest.raises(ValueError):
        build_report(diamond_log(), diamond_graph, 1_000.0, warmup_ms=1_000.0)
    forked = build_flow_graph([RawSource("r", "raw", 10, 50.0, "w1")],
                              [StepDef("a", ("raw",), "ta"), StepDef("b", ("raw",), "tb")])
    with pytest.raises(AmbiguousSink):
        build_report([execute(1.0, "a", 1)], forked, 1_000.0)


def test_report_dict_roundtrip(diamond_graph: FlowGraph):
    """Test reports survive their JSON form"""
    report = build_report(diamond_log(), diamond_graph, 180_000.0, warmup_ms=60_000.0)
    assert MetricsReport.from_dict(json.loads(json.dumps(report.to_dict()))) == report


@pytest.mark.parametrize("strategy", [Strategy.CP, Strategy.CRRB, Strategy.LOCAL])
def test_report_matches_replay(diamond_config, strategy):
    """Test the report against an independent recomputation from the event log"""
    config = diamond_config(strategy)
    run = Simulator(config).run()
    graph = config.build_graph()
    expected = replay_report(run.events, [p.steps for p in enumerate_paths(graph)], "D", config.run_duration_ms,
                             config.eval_period_ms)
    report = run.report
    assert report.path_rates == pytest.approx(expected["path_rates"])
    assert report.min_path_rate == pytest.approx(expected["min_path_rate"])
    assert report.max_path_rate == pytest.approx(expected["max_path_rate"])
    assert report.last_event_throughput == pytest.approx(expected["last_event_throughput"])
    assert report.sink_executions == expected["sink_executions"]
    assert report.max_raw_delay_ms == pytest.approx(expected["max_raw_delay_ms"])
    assert report.last_event_exec_ms == pytest.approx(expected["last_event_exec_ms"])
    assert report.last_event_read_ms == pytest.approx(expected["last_event_read_ms"])


def make_report(label, seed, rate):
    return MetricsReport(label=label, seed=seed, run_duration_ms=1.0, warmup_ms=0.0, sink="D", min_path_rate=rate,
                         max_path_rate=rate, critical_path="A>B>D", last_event_throughput=rate,
                         max_raw_delay_ms=1.0, last_event_exec_ms=1.0, last_event_read_ms=1.0,
                         sink_executions=1, placement_changes=seed)


def test_compare_identical_seeds():
    """Test identical runs have zero deviation"""
    rows = compare_strategies({"CRRB": [make_report("CRRB", 0, 4.0)] * 5})
    assert rows[0].runs == 5
    assert rows[0].mean("min_path_rate") == 4.0
    assert rows[0].std("min_path_rate") == 0.0


def test_compare_mean_std():
    """Test means and population deviations per label"""
    rows = compare_strategies({
        "GA": [make_report("GA", 0, 2.0), make_report("GA", 1, 4.0)],
        "CP_1_0": [make_report("CP_1_0", 0, 5.0)],
        "LOCAL": [],
    })
    assert [r.label for r in rows] == ["CP_1_0", "GA"]
    ga = rows[1]
    assert ga.mean("last_event_throughput") == 3.0
    assert ga.std("last_event_throughput") == 1.0
    assert ga.mean("placement_changes") == 0.5


def test_comparison_files(tmp_path):
    """Test the CSV and JSON comparison tables"""
    rows = compare_strategies({"GA": [make_report("GA", 0, 2.0), make_report("GA", 1, 4.0)]})
    write_comparison_csv(rows, tmp_path / "comparison.csv")
    write_comparison_json(rows, tmp_path / "comparison.json")
    with open(tmp_path / "comparison.csv", newline="") as f:
        table = list(csv.reader(f))
    assert table[0] == comparison_columns()
    assert len(table[0]) == 2 + 2 * len(METRIC_FIELDS)
    assert table[1][:4] == ["GA", "2", "3.0", "1.0"]
    doc = json.loads((tmp_path / "comparison.json").read_text())
    assert doc["GA"]["metrics"]["min_path_rate"] == {"mean": 3.0, "std": 1.0}
