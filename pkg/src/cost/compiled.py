"""
Index-based form of a placement problem.
Turns a flow graph, one window of statistics and the worker set into numpy
arrays so solvers can evaluate many candidate placements at once.
"""
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import MissingStats
from ..flow.graph import FlowGraph
from ..flow.model import FlowPath
from .model import CostParams, Placement, StepStats, WorkerProfile


class CompiledProblem:
    """
    Placement problem in array form.

    Steps, producers and workers are indexed in sorted id order. A candidate
    is a pair of integer vectors: code[s] is the worker index of step s and
    data[p] the worker index storing producer p's output.

    Attributes:
        penalty: Device change multiplier in effect (1.0 when there is no
            usable previous placement)
        prev_code: Previous worker index per step, -1 when unknown
        static_lb: Best possible cost per step over all workers
    """

    def __init__(self, graph: FlowGraph, paths: Sequence[FlowPath], stats: Mapping[str, StepStats],
                 workers: Sequence[WorkerProfile], params: CostParams, previous: Optional[Placement] = None,
                 capacity_override: Optional[int] = None):
        self.graph = graph
        self.params = params
        self.paths = list(paths)
        self.step_ids: List[str] = list(graph.step_ids)
        self.producer_ids: List[str] = list(graph.producer_ids)
        self.workers: List[WorkerProfile] = sorted(workers, key=lambda w: w.id)
        self.worker_ids: List[str] = [w.id for w in self.workers]
        self.step_index: Dict[str, int] = {s: i for i, s in enumerate(self.step_ids)}
        self.producer_index: Dict[str, int] = {p: i for i, p in enumerate(self.producer_ids)}
        self.worker_index: Dict[str, int] = {w: i for i, w in enumerate(self.worker_ids)}

        n_steps = len(self.step_ids)
        self.n_steps = n_steps
        self.n_producers = len(self.producer_ids)
        self.n_workers = len(self.workers)

        self.cpu = np.array([w.cpu_factor for w in self.workers], dtype=float)
        cap = [capacity_override if capacity_override is not None else w.code_capacity for w in self.workers]
        self.capacity = np.array(cap, dtype=int)

        self.exec_ms = np.zeros(n_steps)
        self.write_ms = np.zeros(n_steps)
        self.bytes = np.ones(n_steps)
        self.self_producer = np.zeros(n_steps, dtype=int)
        self.inputs: List[List[Tuple[int, float]]] = []
        for s, sid in enumerate(self.step_ids):
            if sid not in stats:
                raise MissingStats(sid)
            st = stats[sid]
            self.exec_ms[s] = st.execute_ms
            self.write_ms[s] = st.write_ms
            self.bytes[s] = st.bytes
            self.self_producer[s] = self.producer_index[sid]
            reads = st.read_for(graph.inputs_of(sid))
            self.inputs.append([(self.producer_index[p], reads[p]) for p in graph.inputs_of(sid)])
        self.read_total = np.array([sum(r for _, r in ins) for ins in self.inputs])

        self.consumers: List[List[int]] = [[] for _ in self.producer_ids]
        for s, ins in enumerate(self.inputs):
            for p, _ in ins:
                self.consumers[p].append(s)
        self.producer_step = np.full(self.n_producers, -1, dtype=int)
        for s, p in enumerate(self.self_producer):
            self.producer_step[p] = s
        # -1 when a source's home worker is not part of the worker set
        self.source_home = np.full(self.n_producers, -1, dtype=int)
        for sid, source in graph.sources.items():
            self.source_home[self.producer_index[sid]] = self.worker_index.get(source.home_worker, -1)

        self.path_matrix = np.zeros((len(self.paths), n_steps))
        self.path_steps: List[np.ndarray] = []
        for k, path in enumerate(self.paths):
            idx = np.array([self.step_index[sid] for sid in path.steps], dtype=int)
            self.path_matrix[k, idx] = 1.0
            self.path_steps.append(idx)
        self.step_paths: List[np.ndarray] = [np.nonzero(self.path_matrix[:, s])[0] for s in range(n_steps)]

        self.prev_code = np.full(n_steps, -1, dtype=int)
        self.penalty = 1.0
        # with penalty 1.0 the previous placement cannot change any cost
        if previous is not None and params.device_change_penalty > 1.0:
            self.penalty = params.device_change_penalty
            for s, sid in enumerate(self.step_ids):
                wid = previous.code_loc.get(sid)
                if wid in self.worker_index:
                    self.prev_code[s] = self.worker_index[wid]
        self.prev_data = np.full(self.n_producers, -1, dtype=int)
        if previous is not None:
            for p, pid in enumerate(self.producer_ids):
                wid = previous.data_loc.get(pid)
                if wid in self.worker_index:
                    self.prev_data[p] = self.worker_index[wid]

        self.static_lb = np.array([self._static_bound(s) for s in range(n_steps)])

    @property
    def total_capacity(self) -> int:
        return int(self.capacity.sum())

    def penalty_factor(self, s: int, w: int) -> float:
        prev = self.prev_code[s]
        return self.penalty if prev >= 0 and prev != w else 1.0

    def _static_bound(self, s: int) -> float:
        base = self.read_total[s] + self.write_ms[s]
        best = min(self.penalty_factor(s, w) * (base + self.exec_ms[s] / self.cpu[w]) for w in range(self.n_workers))
        return best / self.bytes[s]

    def step_costs(self, code: np.ndarray, data: np.ndarray, penalized: bool = True) -> np.ndarray:
        """
        Cost of every step for a batch of candidates.

        Args:
            code: (N, steps) worker indices
            data: (N, producers) worker indices
            penalized: Apply the device change multiplier

        Returns:
            (N, steps) array of step costs
        """
        code = np.atleast_2d(code)
        data = np.atleast_2d(data)
        alpha, beta = self.params.alpha, self.params.beta
        costs = np.empty((code.shape[0], self.n_steps))
        for s in range(self.n_steps):
            ws = code[:, s]
            latency = self.exec_ms[s] / self.cpu[ws]
            for p, t_read in self.inputs[s]:
                latency = latency + np.where(data[:, p] == ws, t_read, alpha * t_read)
            own = data[:, self.self_producer[s]]
            latency = latency + np.where(own == ws, self.write_ms[s], beta * self.write_ms[s])
            if penalized and self.prev_code[s] >= 0:
                latency = latency * np.where(ws != self.prev_code[s], self.penalty, 1.0)
            costs[:, s] = latency / self.bytes[s]
        return costs

    def evaluate(self, code: np.ndarray, data: np.ndarray, penalized: bool = True) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Objective terms for a batch of candidates.

        Returns:
            (max path cost, sum of path costs, per-path costs), one row per candidate
        """
        path_costs = self.step_costs(code, data, penalized) @ self.path_matrix.T
        return path_costs.max(axis=1), path_costs.sum(axis=1), path_costs

    def capacity_ok(self, code: np.ndarray) -> np.ndarray:
        """Boolean mask of candidates that respect every worker's capacity"""
        code = np.atleast_2d(code)
        counts = np.zeros((code.shape[0], self.n_workers), dtype=int)
        rows = np.arange(code.shape[0])
        for s in range(self.n_steps):
            np.add.at(counts, (rows, code[:, s]), 1)
        return (counts <= self.capacity).all(axis=1)

    def default_data(self, code: Sequence[int]) -> np.ndarray:
        """
        Data vector storing every step's output with its code and every raw
        source's output on its home worker (or with its first consumer when
        the home worker is unknown).
        """
        data = np.zeros(self.n_producers, dtype=int)
        for p in range(self.n_producers):
            s = self.producer_step[p]
            if s >= 0:
                data[p] = code[s]
            elif self.source_home[p] >= 0:
                data[p] = self.source_home[p]
            elif self.consumers[p]:
                data[p] = code[self.consumers[p][0]]
        return data

    def to_placement(self, code: Sequence[int], data: Sequence[int]) -> Placement:
        return Placement(
            {sid: self.worker_ids[int(code[s])] for s, sid in enumerate(self.step_ids)},
            {pid: self.worker_ids[int(data[p])] for p, pid in enumerate(self.producer_ids)},
        )

    def from_placement(self, placement: Placement) -> Tuple[np.ndarray, np.ndarray]:
        code = np.array([self.worker_index[placement.code_loc[s]] for s in self.step_ids], dtype=int)
        data = np.array([self.worker_index[placement.data_loc[p]] for p in self.producer_ids], dtype=int)
        return code, data
