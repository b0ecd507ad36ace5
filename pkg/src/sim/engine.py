"""!
@file engine.py
@brief Deterministic discrete-event simulator of the placement manager.

Raw sources emit events on their home workers and write them to their
storage worker. A step fires once every input topic holds a datum it has
not consumed yet; its code worker runs it after earlier queued steps,
reading each input (remote reads multiplied by alpha), executing and
writing its output (remote writes multiplied by beta). Every evaluation
period the manager summarizes the closed window, runs the configured
strategy and migrates relocated steps, which stay inactive until their
code is activated and their data has been moved. A new placement takes
effect once every running execution has finished; no worker starts a new
one while it waits.

Example usage:
@code
run = Simulator(config).run()
print(run.report.last_event_throughput)
@endcode
"""
import logging
from collections import Counter, deque
from dataclasses import dataclass, replace
from typing import Any, Deque, Dict, List, Optional, Set, Tuple

import numpy as np

from ..cost.equations import activation_cost
from ..cost.model import Placement, StatsWindow
from ..errors import InvalidPlacement, ScenarioError
from ..flow.graph import enumerate_paths, last_step
from ..metrics.report import MetricsReport, build_report
from ..solvers.base import SolveRequest, Strategy
from ..solvers.dispatch import solve
from ..solvers.heuristics import round_robin_placement
from .config import ScenarioConfig
from .events import EventKind, EventQueue, SimEvent
from .stats import ExecutionRecord, collect_window_stats, prior_window_stats
from .vsm import VsmState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverWindow:
    """!
    Solver outcome of one evaluation tick, including wall-clock timings
    that are kept out of the deterministic report.
    """
    window: int
    time_ms: float
    label: str
    status: str
    objective: Optional[float]
    nodes: int
    elapsed_ms: int
    first_feasible_ms: Optional[int]
    changes: int


@dataclass
class SimulationRun:
    """!
    Everything a simulation produced.
    """
    config: ScenarioConfig
    report: MetricsReport
    events: List[Dict[str, Any]]
    solver_windows: List[SolverWindow]
    windows: List[StatsWindow]
    final_placement: Placement


@dataclass(frozen=True)
class _PendingSwitch:
    """Placement chosen at an evaluation tick, waiting for running executions to finish"""
    window: int
    tick_ms: float
    placement: Placement
    status: str
    objective: Optional[float]
    nodes: int
    elapsed_ms: int
    first_feasible_ms: Optional[int]


class _StepState:
    """Scheduling state of one step"""

    def __init__(self):
        self.active = True
        self.queued = False
        self.running = False
        self.blackout_until = 0.0
        self.consumed: Dict[str, int] = {}


def window_seed(seed: int, window: int) -> int:
    """Seed handed to randomized strategies at a given evaluation tick"""
    return int(np.random.SeedSequence([seed, window]).generate_state(1)[0])


class Simulator:
    """!
    One simulation run of a scenario.

    The run is fully determined by the scenario: events at equal times are
    processed in scheduling order and exact search is bounded by a node
    budget rather than wall time.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.graph = config.build_graph()
        self.paths = enumerate_paths(self.graph)
        self.sink = last_step(self.graph).id
        self.workers = {w.id: w for w in config.workers}
        self.params = replace(config.params, solver_node_limit=config.node_limit)

        if config.initial_placement is not None:
            try:
                config.initial_placement.validate(self.graph.step_ids, self.graph.producer_ids, config.workers)
            except InvalidPlacement as e:
                raise ScenarioError(str(e), field="initial_placement") from None
            self.placement = config.initial_placement
        else:
            self.placement = round_robin_placement(self.graph, config.workers)

        self.queue = EventQueue()
        self.vsm = VsmState(self.workers)
        self.worker_queue: Dict[str, Deque[str]] = {wid: deque() for wid in sorted(self.workers)}
        self.busy: Dict[str, Optional[int]] = {wid: None for wid in sorted(self.workers)}
        self.state = {sid: _StepState() for sid in self.graph.step_ids}
        self.now = 0.0
        self._next_exec = 0

        self.log: List[Dict[str, Any]] = []
        self.window_records: List[ExecutionRecord] = []
        self.produced_bytes: Counter = Counter()
        self.produced_events: Counter = Counter()
        self.windows: List[StatsWindow] = []
        self.solver_windows: List[SolverWindow] = []
        self.random_decided = False
        self.pending: Optional[_PendingSwitch] = None

        source_bytes = {sid: config.source_bytes(s, 0.0) for sid, s in self.graph.sources.items()}
        self.prior = prior_window_stats(self.graph, self.workers, self.placement, config.eval_period_ms, source_bytes)

    def _exec_id(self) -> int:
        self._next_exec += 1
        return self._next_exec

    def _emit(self, record: Dict[str, Any]) -> None:
        record["t"] = self.now
        self.log.append(record)

    def run(self) -> SimulationRun:
        """Process events until the end of the run and build the report"""
        duration = self.config.run_duration_ms
        for sid in self.graph.source_ids:
            self.queue.schedule(0.0, EventKind.SENSOR_EMIT, source=sid)
        self.queue.schedule(self.config.eval_period_ms, EventKind.EVAL_TICK, window=1)

        handlers = {
            EventKind.SENSOR_EMIT: self._on_sensor_emit,
            EventKind.DATA_WRITTEN: self._on_data_written,
            EventKind.STEP_EXECUTE: self._on_step_execute,
            EventKind.EVAL_TICK: self._on_eval_tick,
            EventKind.MIGRATION_COMPLETE: self._on_migration_complete,
        }
        while self.queue and self.queue.peek_time() < duration:
            event = self.queue.pop()
            self.now = event.time
            handlers[event.kind](event)

        report = build_report(self.log, self.graph, duration, warmup_ms=self.config.eval_period_ms,
                              label=self.config.label, seed=self.config.seed)
        logger.info("%s seed %d: last event %.2f/min, min path %.2f/min", report.label, report.seed,
                    report.last_event_throughput, report.min_path_rate)
        return SimulationRun(self.config, report, self.log, self.solver_windows, self.windows, self.placement)

    def _on_sensor_emit(self, event: SimEvent) -> None:
        sid = event.payload["source"]
        source = self.graph.sources[sid]
        nbytes = self.config.source_bytes(source, self.now)
        target = self.placement.data_loc[sid]
        write_ms = self.workers[source.home_worker].write_ms(nbytes)
        if target != source.home_worker:
            write_ms *= self.params.beta
        exec_id = self._exec_id()
        self.produced_bytes[sid] += nbytes
        self.produced_events[sid] += 1
        self._emit({"kind": EventKind.SENSOR_EMIT.value, "source": sid, "bytes": nbytes, "worker": target,
                    "write_ms": write_ms, "exec_id": exec_id})
        self.queue.schedule(self.now + write_ms, EventKind.DATA_WRITTEN, producer=sid, bytes=nbytes,
                            exec_id=exec_id, origin_ms=self.now)
        if self.now + source.period_ms < self.config.run_duration_ms:
            self.queue.schedule(self.now + source.period_ms, EventKind.SENSOR_EMIT, source=sid)

    def _on_data_written(self, event: SimEvent) -> None:
        p = event.payload
        producer = p["producer"]
        worker = self.placement.data_loc[producer]
        topic = self.graph.output_topic(producer)
        self.vsm.write(worker, producer, topic, p["bytes"], self.now, p["origin_ms"], p["exec_id"])
        self._emit({"kind": EventKind.DATA_WRITTEN.value, "producer": producer, "topic": topic, "worker": worker,
                    "bytes": p["bytes"], "exec_id": p["exec_id"], "origin_ms": p["origin_ms"]})
        for consumer in self.graph.consumers_of(producer):
            self._try_trigger(consumer)

    def _try_trigger(self, sid: str) -> None:
        state = self.state[sid]
        if not state.active or state.queued or state.running:
            return
        for topic in self.graph.step(sid).input_topics:
            latest = self.vsm.latest(topic)
            if latest is None or latest[1].seq <= state.consumed.get(topic, 0):
                return
        state.queued = True
        worker = self.placement.code_loc[sid]
        self.worker_queue[worker].append(sid)
        self._dispatch(worker)

    def _dispatch(self, worker: str) -> None:
        if self.pending is None and self.busy[worker] is None and self.worker_queue[worker]:
            self._start(self.worker_queue[worker].popleft(), worker)

    def _start(self, sid: str, worker_id: str) -> None:
        step = self.graph.step(sid)
        state = self.state[sid]
        state.queued = False
        state.running = True
        worker = self.workers[worker_id]

        local_reads: Dict[str, float] = {}
        reads: Dict[str, float] = {}
        input_ids = []
        origins = []
        bytes_in = 0
        for topic in step.input_topics:
            location, datum = self.vsm.latest(topic)
            state.consumed[topic] = datum.seq
            local = worker.read_ms(datum.bytes)
            local_reads[datum.producer] = local
            reads[datum.producer] = local if location == worker_id else local * self.params.alpha
            input_ids.append(datum.exec_id)
            origins.append(datum.origin_ms)
            bytes_in += datum.bytes

        execute_ms = step.compute_ms(bytes_in)
        observed_execute = execute_ms / worker.cpu_factor
        bytes_out = step.produced_bytes(bytes_in)
        write_ms = worker.write_ms(bytes_out)
        observed_write = write_ms if self.placement.data_loc[sid] == worker_id else write_ms * self.params.beta
        latency = sum(reads.values()) + observed_execute + observed_write

        exec_id = self._exec_id()
        self.busy[worker_id] = exec_id
        record = ExecutionRecord(
            exec_id=exec_id,
            step_id=sid,
            worker_id=worker_id,
            start_ms=self.now,
            end_ms=self.now + latency,
            bytes_in=bytes_in,
            bytes_out=bytes_out,
            local_read_ms=local_reads,
            read_ms=reads,
            execute_ms=execute_ms,
            observed_execute_ms=observed_execute,
            write_ms=write_ms,
            observed_write_ms=observed_write,
            input_exec_ids=tuple(input_ids),
            origin_ms=min(origins),
        )
        self.queue.schedule(record.end_ms, EventKind.STEP_EXECUTE, record=record)

    def _on_step_execute(self, event: SimEvent) -> None:
        record: ExecutionRecord = event.payload["record"]
        sid = record.step_id
        step = self.graph.step(sid)
        self.state[sid].running = False
        self.busy[record.worker_id] = None

        target = self.placement.data_loc[sid]
        self.vsm.write(target, sid, step.output_topic, record.bytes_out, self.now, record.origin_ms, record.exec_id)
        self.produced_bytes[sid] += record.bytes_out
        self.produced_events[sid] += 1
        self.window_records.append(record)
        self._emit({
            "kind": EventKind.STEP_EXECUTE.value,
            "step": sid,
            "worker": record.worker_id,
            "data_worker": target,
            "exec_id": record.exec_id,
            "inputs": list(record.input_exec_ids),
            "origin_ms": record.origin_ms,
            "start_ms": record.start_ms,
            "bytes_in": record.bytes_in,
            "bytes_out": record.bytes_out,
            "read_ms": record.total_read_ms,
            "local_read_ms": record.total_local_read_ms,
            "execute_ms": record.observed_execute_ms,
            "write_ms": record.observed_write_ms,
        })

        for consumer in self.graph.consumers_of(sid):
            self._try_trigger(consumer)
        self._try_trigger(sid)
        self._dispatch(record.worker_id)
        if self.pending is not None and self._idle():
            self._switch(self.pending)

    def _on_eval_tick(self, event: SimEvent) -> None:
        window = event.payload["window"]
        if self.pending is not None:
            logger.warning("t=%.0f ms: window %d placement still waiting at the next tick, applying it now",
                           self.now, self.pending.window)
            self._switch(self.pending)
        start = (window - 1) * self.config.eval_period_ms
        previous = self.windows[-1] if self.windows else None
        stats = collect_window_stats(self.window_records, self.graph, start, self.now, previous, self.prior,
                                     self.produced_bytes, self.produced_events)
        self.windows.append(stats)
        self.window_records = []
        self.produced_bytes = Counter()
        self.produced_events = Counter()

        strategy = self.config.strategy
        if strategy is Strategy.STATIC or (strategy is Strategy.RANDOM and self.random_decided):
            new, status, objective, nodes, elapsed, first = self.placement, "Kept", None, 0, 0, None
        else:
            req = SolveRequest(self.graph, self.paths, stats, self.config.workers, self.params,
                               previous=self.placement, seed=window_seed(self.config.seed, window))
            result = solve(strategy, req, self.config.genetic)
            self.random_decided = True
            new, status, objective = result.placement, result.status.value, result.objective
            nodes, elapsed, first = result.nodes, result.elapsed_ms, result.first_feasible_ms

        switch = _PendingSwitch(window, self.now, new, status, objective, nodes, elapsed, first)
        if new == self.placement or self._idle():
            self._switch(switch)
        else:
            self.pending = switch
            logger.debug("t=%.0f ms window %d: waiting for running executions before relocating", self.now, window)

        next_tick = self.now + self.config.eval_period_ms
        if next_tick < self.config.run_duration_ms:
            self.queue.schedule(next_tick, EventKind.EVAL_TICK, window=window + 1)

    def _idle(self) -> bool:
        return all(b is None for b in self.busy.values())

    def _switch(self, switch: _PendingSwitch) -> None:
        """Apply the placement chosen at a tick and record the tick's outcome"""
        self.pending = None
        moved_steps, moved_data = self._apply(switch.placement)
        self._emit({
            "kind": EventKind.EVAL_TICK.value,
            "window": switch.window,
            "tick_ms": switch.tick_ms,
            "strategy": self.config.label,
            "status": switch.status,
            "objective": switch.objective,
            "nodes": switch.nodes,
            "changes": len(moved_steps),
            "moved_data": len(moved_data),
            "code_loc": dict(self.placement.code_loc),
            "data_loc": dict(self.placement.data_loc),
        })
        self.solver_windows.append(SolverWindow(switch.window, switch.tick_ms, self.config.label, switch.status,
                                                switch.objective, switch.nodes, switch.elapsed_ms,
                                                switch.first_feasible_ms, len(moved_steps)))
        logger.info("t=%.0f ms window %d %s: %s, objective %s, %d steps relocated", self.now, switch.window,
                    self.config.label, switch.status,
                    "-" if switch.objective is None else f"{switch.objective:.6g}", len(moved_steps))
        for worker in self.worker_queue:
            self._dispatch(worker)

    def _apply(self, new: Placement) -> Tuple[Set[str], Set[str]]:
        """!
        Switch to a new placement.

        Moved data is relocated at once. Every step whose code or any of
        whose inputs or output moved is deactivated for the activation cost
        of its new worker (code moves only) plus the moved bytes divided by
        the bandwidth. Queued executions of those steps are dropped.
        Runs once no execution is in flight, so every running execution
        finished under the placement it started with.
        """
        old = self.placement
        moved_steps = set(new.moved_steps(old))
        moved_data = set(new.moved_data(old))
        self.placement = new

        moved_bytes: Dict[str, int] = {}
        for producer in sorted(moved_data):
            datum = self.vsm.move(self.graph.output_topic(producer), new.data_loc[producer])
            moved_bytes[producer] = datum.bytes if datum is not None else 0

        affected = set(moved_steps)
        for producer in moved_data:
            if not self.graph.is_source(producer):
                affected.add(producer)
            affected.update(self.graph.consumers_of(producer))

        for sid in sorted(affected):
            blackout = 0.0
            if sid in moved_steps:
                blackout += activation_cost(self.graph.step(sid), self.workers[new.code_loc[sid]])
            for producer in self.graph.inputs_of(sid) + (sid,):
                blackout += moved_bytes.get(producer, 0) / self.config.bandwidth_bytes_per_ms
            state = self.state[sid]
            if state.queued:
                self.worker_queue[old.code_loc[sid]].remove(sid)
                state.queued = False
            state.active = False
            state.blackout_until = max(state.blackout_until, self.now + blackout)
            self.queue.schedule(self.now + blackout, EventKind.MIGRATION_COMPLETE, step=sid,
                                worker=new.code_loc[sid], blackout_ms=blackout)
            logger.debug("Migrating %s to %s, inactive for %.3f ms", sid, new.code_loc[sid], blackout)
        return moved_steps, moved_data

    def _on_migration_complete(self, event: SimEvent) -> None:
        sid = event.payload["step"]
        state = self.state[sid]
        if self.now < state.blackout_until:
            return
        state.active = True
        self._emit({"kind": EventKind.MIGRATION_COMPLETE.value, "step": sid, "worker": event.payload["worker"],
                    "blackout_ms": event.payload["blackout_ms"]})
        self._try_trigger(sid)


def run_simulation(config: ScenarioConfig) -> MetricsReport:
    """!
    Run a scenario and return its metrics report.

    @exception Infeasible The configured strategy could not place every step
    """
    return Simulator(config).run().report
