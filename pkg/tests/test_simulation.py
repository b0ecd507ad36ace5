"""
Tests for the discrete-event simulator, its statistics and its scenario model.
"""
import io
import json

import pytest

from src.cost import CostParams, Placement, StatsWindow, WorkerProfile
from src.errors import ScenarioError
from src.flow import RawSource, StepDef, chain_flow
from src.sim import (
    DataSizeSchedule,
    EventKind,
    EventQueue,
    ExecutionRecord,
    ScenarioConfig,
    Simulator,
    VsmState,
    collect_window_stats,
    dump_event_log,
    load_event_log,
    prior_window_stats,
    strategy_label,
    summarize,
    window_seed
)
from src.solvers import Strategy
from tests.conftest import make_workers

pytestmark = pytest.mark.sim


def executions(run, step=None):
    return [e for e in run.events if e["kind"] == "StepExecute" and (step is None or e["step"] == step)]


def single_step_config(placement=None, n_workers=1, **overrides) -> ScenarioConfig:
    sources, steps = chain_flow(1, bytes_per_event=64, period_ms=100.0)
    values = dict(sources=sources, steps=steps, workers=make_workers(n_workers), strategy=Strategy.STATIC,
                  eval_period_ms=500.0, run_duration_ms=1_000.0, initial_placement=placement)
    values.update(overrides)
    return ScenarioConfig(**values)


def test_single_step_run():
    """Test one source every 100 ms feeding one local step for one second"""
    run = Simulator(single_step_config()).run()
    runs = executions(run)
    assert len(runs) == 10
    assert all(e["read_ms"] == e["local_read_ms"] for e in runs)
    assert all(e["worker"] == e["data_worker"] == "w1" for e in runs)
    assert run.windows[0].steps["s1"].executions == 5
    assert run.report.sink_executions == 5


def test_remote_read_doubles():
    """Test a remote input with alpha 2 doubles the observed read time"""
    local = Placement({"s1": "w1"}, {"src": "w1", "s1": "w1"})
    remote = Placement({"s1": "w1"}, {"src": "w2", "s1": "w1"})
    params = CostParams(alpha=2.0)
    local_run = Simulator(single_step_config(local, n_workers=2, params=params)).run()
    remote_run = Simulator(single_step_config(remote, n_workers=2, params=params)).run()

    def mean_read(run):
        reads = [e["read_ms"] for e in executions(run)]
        return sum(reads) / len(reads)

    assert mean_read(remote_run) / mean_read(local_run) == pytest.approx(2.0, rel=1e-12)
    assert all(e["local_read_ms"] == 1.0 for e in executions(remote_run))


def test_single_worker_latencies():
    """Test measured latencies on one worker equal the analytic step latency"""
    worker = WorkerProfile("w1", code_capacity=3, base_read_ms=2.0, base_write_ms=1.5, read_ms_per_kib=0.5,
                           write_ms_per_kib=0.25)
    sources, _ = chain_flow(3, bytes_per_event=2048, period_ms=200.0)
    steps = [StepDef("s1", ("t0",), "t1", fixed_ms=3.0, per_byte_ms=0.001),
             StepDef("s2", ("t1",), "t2", fixed_ms=1.0, output_bytes=512),
             StepDef("s3", ("t2",), "t3", fixed_ms=2.0)]
    config = ScenarioConfig(sources, steps, (worker,), strategy=Strategy.STATIC, eval_period_ms=1_000.0,
                            run_duration_ms=3_000.0)
    run = Simulator(config).run()
    graph = config.build_graph()
    assert executions(run)
    for e in executions(run):
        step = graph.step(e["step"])
        assert e["read_ms"] == pytest.approx(worker.read_ms(e["bytes_in"]))
        assert e["execute_ms"] == pytest.approx(step.compute_ms(e["bytes_in"]))
        assert e["write_ms"] == pytest.approx(worker.write_ms(e["bytes_out"]))
        assert e["t"] - e["start_ms"] == pytest.approx(e["read_ms"] + e["execute_ms"] + e["write_ms"])
    assert {e["bytes_out"] for e in executions(run, "s2")} == {512}


def test_determinism(diamond_config):
    """Test identical scenarios give identical logs and reports"""
    config = diamond_config(Strategy.CP)
    first = Simulator(config).run()
    second = Simulator(config).run()
    assert json.dumps(first.report.to_dict(), sort_keys=True) == json.dumps(second.report.to_dict(), sort_keys=True)
    assert first.events == second.events
    assert first.final_placement == second.final_placement


def test_random_seeds_differ(diamond_config):
    """Test the run seed drives the random strategy"""
    placements = {
        tuple(Simulator(diamond_config(Strategy.RANDOM, n_workers=4, seed=seed)).run().final_placement.code_loc.values())
        for seed in range(10)
    }
    assert len(placements) > 1


@pytest.mark.parametrize("strategy", [Strategy.CP, Strategy.CRRB, Strategy.RANDOM, Strategy.LOCAL, Strategy.GA])
def test_conservation(diamond_config, strategy):
    """Test the sink never executes more often than the source emits"""
    run = Simulator(diamond_config(strategy)).run()
    emitted = sum(1 for e in run.events if e["kind"] == "SensorEmit")
    assert len(executions(run, "D")) <= emitted
    for e in executions(run):
        assert e["t"] >= e["origin_ms"]


def test_causality(diamond_config):
    """Test sink delays cover at least the local latency of a full path"""
    run = Simulator(diamond_config(Strategy.CRRB)).run()
    # read 1 ms per input, execute 1 ms, write 1 ms on default workers
    shortest = 3.0 + 3.0 + 4.0
    for e in executions(run, "D"):
        assert e["t"] - e["origin_ms"] >= shortest


def test_migration_blackout(diamond_config):
    """Test relocated steps stay idle until their migration completes"""
    workers = [
        WorkerProfile("w1", download_ms=200.0, subscribe_ms=50.0),
        WorkerProfile("w2", download_ms=200.0, subscribe_ms=50.0),
        WorkerProfile("w3", cpu_factor=0.1, download_ms=200.0, subscribe_ms=50.0),
    ]
    initial = Placement({"A": "w3", "B": "w3", "C": "w1", "D": "w2"},
                        {"src": "w3", "A": "w3", "B": "w3", "C": "w1", "D": "w2"})
    run = Simulator(diamond_config(Strategy.CP, workers=workers, initial_placement=initial)).run()
    ticks = [e for e in run.events if e["kind"] == "EvalTick"]
    assert ticks[0]["changes"] > 0
    assert ticks[0]["code_loc"]["A"] != "w3"

    done = [e for e in run.events if e["kind"] == "MigrationComplete"]
    assert done
    assert any(e["blackout_ms"] >= 250.0 for e in done)
    for m in done:
        begin = m["t"] - m["blackout_ms"]
        assert not [e for e in executions(run, m["step"]) if begin < e["start_ms"] < m["t"]]


def test_relocation_waits_for_running_executions():
    """Test a new placement takes effect only after in-flight executions finish"""
    sources = [RawSource("src", "raw", 64, 100.0, "w1")]
    steps = [StepDef("A", ("raw",), "tA", fixed_ms=150.0), StepDef("B", ("tA",), "tB")]
    initial = Placement({"A": "w2", "B": "w2"}, {"src": "w1", "A": "w1", "B": "w1"})
    config = ScenarioConfig(sources, steps, make_workers(2), strategy=Strategy.CP, eval_period_ms=1_000.0,
                            run_duration_ms=4_000.0, initial_placement=initial)
    run = Simulator(config).run()

    first = [e for e in run.events if e["kind"] == "EvalTick"][0]
    assert first["tick_ms"] == 1_000.0
    assert first["changes"] + first["moved_data"] > 0
    # w2 is never idle, so the switch waits for its current execution
    assert first["t"] > first["tick_ms"]
    for e in executions(run):
        assert not first["tick_ms"] < e["start_ms"] < first["t"]
        assert not e["start_ms"] < first["t"] < e["t"]

    data_loc = dict(initial.data_loc)
    for e in run.events:
        if e["kind"] == "EvalTick":
            data_loc = e["data_loc"]
        elif e["kind"] == "StepExecute":
            assert e["data_worker"] == data_loc[e["step"]]


def test_random_decided_once(diamond_config):
    """Test the random strategy places once and keeps its placement"""
    run = Simulator(diamond_config(Strategy.RANDOM)).run()
    statuses = [w.status for w in run.solver_windows]
    assert statuses[0] == "Feasible"
    assert set(statuses[1:]) == {"Kept"}
    assert all(w.changes == 0 for w in run.solver_windows[1:])


def test_static_keeps_placement(diamond_config):
    """Test the static strategy never relocates"""
    run = Simulator(diamond_config(Strategy.STATIC)).run()
    assert run.report.placement_changes == 0
    assert not [e for e in run.events if e["kind"] == "MigrationComplete"]


def test_size_breakpoint_moves_placement():
    """Test swapping the dominant producer mid-run relocates steps"""
    sources = [RawSource("r1", "x", 64, 100.0, "w1"), RawSource("r2", "y", 8192, 100.0, "w2")]
    steps = [StepDef("a", ("x",), "ta"), StepDef("b", ("y",), "tb"), StepDef("c", ("ta", "tb"), "tc")]
    workers = make_workers(2, read_ms_per_kib=1.0, write_ms_per_kib=1.0)
    schedule = (DataSizeSchedule("r1", ((2_000.0, 8192),)), DataSizeSchedule("r2", ((2_000.0, 64),)))
    config = ScenarioConfig(sources, steps, workers, CostParams(device_change_penalty=1.0), Strategy.CP,
                            eval_period_ms=1_000.0, run_duration_ms=4_000.0, data_size_schedule=schedule)
    run = Simulator(config).run()
    ticks = {e["window"]: e for e in run.events if e["kind"] == "EvalTick"}
    before, after = ticks[2]["code_loc"], ticks[3]["code_loc"]
    assert before["a"] == before["c"] != before["b"]
    assert after["b"] == after["c"] != after["a"]
    assert ticks[3]["changes"] > 0
    emitted = {(e["source"], e["bytes"]) for e in run.events if e["kind"] == "SensorEmit" and e["t"] >= 2_000.0}
    assert emitted == {("r1", 8192), ("r2", 64)}


def test_invalid_initial_placement(diamond_config):
    """Test an initial placement over capacity is a scenario error"""
    crowded = Placement({"A": "w1", "B": "w1", "C": "w1", "D": "w2"},
                        {"src": "w1", "A": "w1", "B": "w1", "C": "w1", "D": "w2"})
    with pytest.raises(ScenarioError) as info:
        Simulator(diamond_config(initial_placement=crowded))
    assert info.value.field == "initial_placement"


def test_config_validation(diamond_config):
    """Test malformed scenarios name the offending field"""
    with pytest.raises(ScenarioError) as info:
        diamond_config(eval_period_ms=6_000.0)
    assert info.value.field == "eval_period_ms"
    with pytest.raises(ScenarioError) as info:
        diamond_config(workers=())
    assert info.value.field == "workers"
    with pytest.raises(ScenarioError) as info:
        diamond_config(workers=make_workers(1) + make_workers(1))
    assert info.value.field == "workers[1].id"
    with pytest.raises(ScenarioError) as info:
        diamond_config(data_size_schedule=(DataSizeSchedule("nope", ((10.0, 5),)),))
    assert info.value.field == "data_size_schedule[0].source"
    with pytest.raises(ScenarioError) as info:
        diamond_config(data_size_schedule=(DataSizeSchedule("src", ((9_000.0, 5),)),))
    assert info.value.field == "data_size_schedule[0].points[0]"


def test_config_labels_and_overrides(diamond_config):
    """Test experiment labels and command line overrides"""
    assert strategy_label(Strategy.CP, 1.25) == "CP_1_25"
    assert strategy_label(Strategy.GA, 2.0) == "GA"
    assert strategy_label(Strategy.LOCAL, cpu_factor=0.5) == "LOCAL@cpu0.5"
    config = diamond_config(Strategy.CP).with_overrides(penalty=1.5, time_limit_ms=500, cpu_factor=0.5, seed=9,
                                                       strategy=None)
    assert config.params.device_change_penalty == 1.5
    assert config.params.solver_time_limit_ms == 500
    assert {w.cpu_factor for w in config.workers} == {0.5}
    assert config.seed == 9
    assert config.strategy is Strategy.CP
    assert config.label == "CP_1_5@cpu0.5"


def test_data_size_schedule():
    """Test piecewise constant event sizes"""
    schedule = DataSizeSchedule("r", ((300.0, 30), (100.0, 10)))
    assert schedule.points == ((100.0, 10), (300.0, 30))
    assert schedule.bytes_at(0.0, 5) == 5
    assert schedule.bytes_at(100.0, 5) == 10
    assert schedule.bytes_at(299.9, 5) == 10
    assert schedule.bytes_at(1e9, 5) == 30
    with pytest.raises(ValueError):
        DataSizeSchedule("r", ((10.0, 0),))


def test_event_queue_order():
    """Test events pop by time, then in scheduling order"""
    queue = EventQueue()
    queue.schedule(5.0, EventKind.EVAL_TICK, window=1)
    queue.schedule(1.0, EventKind.SENSOR_EMIT, source="a")
    queue.schedule(5.0, EventKind.SENSOR_EMIT, source="b")
    queue.schedule(1.0, EventKind.SENSOR_EMIT, source="c")
    assert queue.peek_time() == 1.0
    order = [queue.pop().payload for _ in range(len(queue))]
    assert order == [{"source": "a"}, {"source": "c"}, {"window": 1}, {"source": "b"}]
    assert not queue
    with pytest.raises(ValueError):
        queue.schedule(-1.0, EventKind.EVAL_TICK)


def test_vsm_single_copy():
    """Test a topic's latest datum lives on exactly one worker"""
    vsm = VsmState(["w1", "w2"])
    assert vsm.latest("t") is None
    vsm.write("w1", "p", "t", 10, 1.0, 0.0, 1)
    datum = vsm.write("w2", "p", "t", 20, 2.0, 1.0, 2)
    assert datum.seq == 2
    assert vsm.contents("w1") == {}
    assert vsm.latest("t") == ("w2", datum)
    assert vsm.move("t", "w1") == datum
    assert vsm.location("t") == "w1"
    assert list(vsm) == [("w1", datum)]
    with pytest.raises(KeyError):
        vsm.write("w9", "p", "t", 1, 0.0, 0.0, 3)


def record(exec_id, step="s1", end_ms=10.0, read=2.0, execute=3.0, write=1.0, remote=1.0) -> ExecutionRecord:
    return ExecutionRecord(exec_id, step, "w1", end_ms - 6.0, end_ms, 100, 100, {"src": read}, {"src": read * remote},
                           execute, execute, write, write)


def test_summarize():
    """Test ten executions of 6 ms average to 6 ms"""
    stats = summarize("s1", [record(i) for i in range(10)])
    assert stats.executions == 10
    assert stats.read_ms + stats.execute_ms + stats.write_ms == pytest.approx(6.0)
    assert stats.bytes == 1000
    assert stats.input_read_ms == {"src": 2.0}


def test_summarize_mixed_reads():
    """Test observed reads average local and remote executions"""
    stats = summarize("s1", [record(1), record(2, remote=3.0)])
    assert stats.read_ms == 2.0
    assert stats.observed_read_ms == pytest.approx((2.0 + 6.0) / 2)


def test_window_carry_forward(chain_graph):
    """Test steps idle in a window keep their previous statistics"""
    placement = Placement({s: "w1" for s in chain_graph.step_ids}, {p: "w1" for p in chain_graph.producer_ids})
    prior = prior_window_stats(chain_graph, {"w1": WorkerProfile("w1")}, placement, 1_000.0, {"src": 64})
    first = collect_window_stats([record(1, end_ms=500.0)], chain_graph, 0.0, 1_000.0, None, prior)
    assert first["s1"].executions == 1
    assert first["s2"] == prior["s2"]
    second = collect_window_stats([record(2, end_ms=1_500.0, execute=9.0)], chain_graph, 1_000.0, 2_000.0, first,
                                  prior)
    assert second["s1"].execute_ms == 9.0
    third = collect_window_stats([], chain_graph, 2_000.0, 3_000.0, second, prior)
    assert third["s1"].execute_ms == 9.0
    assert third["s1"].executions == 0
    assert isinstance(third, StatsWindow)


def test_prior_stats(chain_graph):
    """Test analytic statistics before anything executed"""
    placement = Placement({s: "w1" for s in chain_graph.step_ids}, {p: "w1" for p in chain_graph.producer_ids})
    worker = WorkerProfile("w1", read_ms_per_kib=1.0)
    prior = prior_window_stats(chain_graph, {"w1": worker}, placement, 1_000.0, {"src": 512})
    assert prior["s1"].bytes == 10 * 512
    assert prior["s1"].read_ms == pytest.approx(1.5)
    assert prior["s3"].execute_ms == 1.0
    assert prior.producer_bytes["src"] == 10 * 512


def test_window_seed():
    """Test per-window seeds are stable and distinct"""
    assert window_seed(0, 1) == window_seed(0, 1)
    assert len({window_seed(s, w) for s in range(5) for w in range(1, 6)}) == 25


def test_event_log_lines():
    """Test JSON Lines output with sorted keys"""
    stream = io.StringIO()
    dump_event_log([{"t": 1.0, "kind": "SensorEmit"}, {"b": 2, "a": 1}], stream)
    assert stream.getvalue() == '{"kind": "SensorEmit", "t": 1.0}\n{"a": 1, "b": 2}\n'
    stream.seek(0)
    assert load_event_log(stream) == [{"t": 1.0, "kind": "SensorEmit"}, {"b": 2, "a": 1}]

