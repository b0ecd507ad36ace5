"""
Exact placement search.
Depth-first branch-and-bound over code and data locations minimizing the
maximum path cost, with the sum of path costs as tie-breaker.
"""
import logging
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..cost.compiled import CompiledProblem
from .base import SolveRequest, SolveResult, SolveStatus, Stopwatch, result_for

logger = logging.getLogger(__name__)

# relative tolerance when comparing objective values
REL_TOL = 1e-12
# nodes between wall clock checks
CLOCK_STRIDE = 64

Key = Tuple[float, float]


def improves(candidate: Key, incumbent: Optional[Key]) -> bool:
    """
    True when (max, sum) is lexicographically better than the incumbent
    beyond floating tolerance.
    """
    if incumbent is None:
        return True
    worst, total = candidate
    best_worst, best_total = incumbent
    tol = REL_TOL * max(1.0, abs(best_worst))
    tol_sum = REL_TOL * max(1.0, abs(best_total))
    if worst - best_worst < -tol:
        return True
    return worst - best_worst <= tol and total - best_total < -tol_sum


class BranchAndBound:
    """
    Search state for one exact solve.

    Steps are decided in topological order. A producer's data location is
    decided right after the last of its producer step and consumers got a
    code location, and only among those code locations: any other worker
    makes every related read and write remote and can never be better.

    The bound of a path is the sum of per-step bounds: the exact cost once a
    step and its data are fixed, optimistic local I/O for undecided data,
    and the best case over all workers for undecided steps.
    """

    def __init__(self, problem: CompiledProblem, node_limit: Optional[int], watch: Stopwatch):
        self.problem = problem
        self.node_limit = node_limit
        self.watch = watch
        self.alpha = problem.params.alpha
        self.beta = problem.params.beta

        self.exec_ms = problem.exec_ms.tolist()
        self.write_ms = problem.write_ms.tolist()
        self.bytes = problem.bytes.tolist()
        self.cpu = problem.cpu.tolist()
        self.capacity = problem.capacity.tolist()
        self.inputs = problem.inputs
        self.self_producer = problem.self_producer.tolist()
        self.producer_step = problem.producer_step.tolist()
        self.consumers = problem.consumers
        self.step_paths = problem.step_paths
        self.path_weight = [len(idx) for idx in problem.step_paths]

        self.order = [problem.step_index[sid] for sid in problem.graph.topological_steps()]
        position = {s: i for i, s in enumerate(self.order)}
        ready_at: Dict[int, List[int]] = defaultdict(list)
        self.code = [-1] * problem.n_steps
        self.data = [-1] * problem.n_producers
        for p in range(problem.n_producers):
            related = [position[c] for c in problem.consumers[p]]
            if self.producer_step[p] >= 0:
                related.append(position[self.producer_step[p]])
            if related:
                ready_at[max(related)].append(p)
            else:
                # unconsumed raw source: its location has no cost
                home = int(problem.source_home[p])
                self.data[p] = home if home >= 0 else 0
        self.decisions: List[Tuple[bool, int]] = []
        for i, s in enumerate(self.order):
            self.decisions.append((True, s))
            self.decisions.extend((False, p) for p in sorted(ready_at[i]))

        self.load = [0] * problem.n_workers
        prev_hosted = defaultdict(list)
        for s, w in enumerate(problem.prev_code.tolist()):
            if w >= 0:
                prev_hosted[w].append(s)
        self.signature = [(self.cpu[w], self.capacity[w], tuple(prev_hosted[w])) for w in range(problem.n_workers)]

        self.step_lb = problem.static_lb.tolist()
        self.path_lb = problem.path_matrix @ problem.static_lb
        self.lb_sum = float(self.path_lb.sum())

        self.best: Optional[Tuple[List[int], List[int]]] = None
        self.best_key: Optional[Key] = None
        self.nodes = 0
        self.stopped = False
        self.first_feasible_ms: Optional[int] = None

    def _step_bound(self, s: int) -> float:
        w = self.code[s]
        if w < 0:
            return float(self.problem.static_lb[s])
        latency = self.exec_ms[s] / self.cpu[w]
        for p, t_read in self.inputs[s]:
            d = self.data[p]
            latency += t_read if d < 0 or d == w else self.alpha * t_read
        d = self.data[self.self_producer[s]]
        latency += self.write_ms[s] if d < 0 or d == w else self.beta * self.write_ms[s]
        return latency * self.problem.penalty_factor(s, w) / self.bytes[s]

    def _refresh(self, s: int, undo: list) -> None:
        value = self._step_bound(s)
        old = self.step_lb[s]
        if value == old:
            return
        idx = self.step_paths[s]
        undo.append((s, old, self.path_lb[idx].copy(), self.lb_sum))
        self.step_lb[s] = value
        self.path_lb[idx] += value - old
        self.lb_sum += (value - old) * self.path_weight[s]

    def _restore(self, undo: list) -> None:
        for s, old, saved, lb_sum in reversed(undo):
            self.step_lb[s] = old
            self.path_lb[self.step_paths[s]] = saved
            self.lb_sum = lb_sum

    def _pruned(self) -> bool:
        if self.best_key is None:
            return False
        return not improves((float(self.path_lb.max()), self.lb_sum), self.best_key)

    def _code_candidates(self, s: int) -> List[int]:
        seen_fresh = set()
        scored = []
        for w in range(self.problem.n_workers):
            if self.load[w] >= self.capacity[w]:
                continue
            if self.load[w] == 0:
                # idle workers with identical profiles are interchangeable
                if self.signature[w] in seen_fresh:
                    continue
                seen_fresh.add(self.signature[w])
            self.code[s] = w
            scored.append((self._step_bound(s), self.load[w], w))
        self.code[s] = -1
        # equal bounds go to the least loaded worker first
        scored.sort()
        return [w for _, _, w in scored]

    def _data_candidates(self, p: int) -> List[int]:
        first = []
        s = self.producer_step[p]
        if s >= 0:
            first.append(self.code[s])
        rest = sorted({self.code[c] for c in self.consumers[p]} - set(first))
        return first + rest

    def _over_budget(self) -> bool:
        if self.node_limit is not None and self.nodes >= self.node_limit:
            return True
        return self.nodes % CLOCK_STRIDE == 0 and self.watch.expired()

    def offer(self, code: List[int], data: List[int]) -> bool:
        """Evaluate a complete candidate and keep it if it beats the incumbent"""
        worst, total, _ = self.problem.evaluate(np.array(code), np.array(data), penalized=True)
        key = (float(worst[0]), float(total[0]))
        if not improves(key, self.best_key):
            return False
        self.best = (list(code), list(data))
        self.best_key = key
        if self.first_feasible_ms is None:
            self.first_feasible_ms = self.watch.elapsed_ms()
        logger.debug("Incumbent %.6g (sum %.6g) after %d nodes", key[0], key[1], self.nodes)
        return True

    def branch(self, depth: int = 0) -> None:
        if depth == len(self.decisions):
            self.offer(self.code, self.data)
            return
        is_code, idx = self.decisions[depth]
        candidates = self._code_candidates(idx) if is_code else self._data_candidates(idx)
        for w in candidates:
            self.nodes += 1
            if self._over_budget():
                self.stopped = True
                return
            undo: list = []
            if is_code:
                self.code[idx] = w
                self.load[w] += 1
                self._refresh(idx, undo)
            else:
                self.data[idx] = w
                s = self.producer_step[idx]
                if s >= 0:
                    self._refresh(s, undo)
                for c in self.consumers[idx]:
                    self._refresh(c, undo)
            if not self._pruned():
                self.branch(depth + 1)
            self._restore(undo)
            if is_code:
                self.code[idx] = -1
                self.load[w] -= 1
            else:
                self.data[idx] = -1
            if self.stopped:
                return

    def greedy(self) -> Tuple[List[int], List[int]]:
        """
        Warm start: each step in topological order on the worker with spare
        capacity that minimizes its own cost given the steps placed so far.
        """
        problem = self.problem
        code = [-1] * problem.n_steps
        load = [0] * problem.n_workers
        for s in self.order:
            best = None
            for w in range(problem.n_workers):
                if load[w] >= self.capacity[w]:
                    continue
                latency = self.exec_ms[s] / self.cpu[w] + self.write_ms[s]
                for p, t_read in self.inputs[s]:
                    ps = self.producer_step[p]
                    stored = code[ps] if ps >= 0 else int(problem.source_home[p])
                    latency += t_read if stored == w else self.alpha * t_read
                cost = latency * problem.penalty_factor(s, w) / self.bytes[s]
                if best is None or cost < best[0]:
                    best = (cost, w)
            code[s] = best[1]
            load[best[1]] += 1
        return code, problem.default_data(code).tolist()


def _previous_vectors(problem: CompiledProblem, req: SolveRequest) -> Optional[Tuple[List[int], List[int]]]:
    if req.previous is None:
        return None
    try:
        code, data = problem.from_placement(req.previous)
    except KeyError:
        return None
    if not problem.capacity_ok(code)[0]:
        return None
    return code.tolist(), data.tolist()


def solve_exact(req: SolveRequest) -> SolveResult:
    """
    Branch-and-bound search for the placement minimizing the maximum path cost.

    Steps relocated away from their previous worker have their cost
    multiplied by the device change penalty. The search stops at
    solver_time_limit_ms or solver_node_limit, returning the best placement
    found with status FeasibleTimeLimit.

    Raises:
        Infeasible: If the workers cannot host every step
    """
    watch = Stopwatch(req.params.solver_time_limit_ms)
    req.check_capacity()
    problem = req.compile()
    search = BranchAndBound(problem, req.params.solver_node_limit, watch)

    search.offer(*search.greedy())
    previous = _previous_vectors(problem, req)
    if previous is not None:
        search.offer(*previous)
    search.branch()

    status = SolveStatus.FEASIBLE_TIME_LIMIT if search.stopped else SolveStatus.OPTIMAL
    code, data = search.best
    logger.debug("Exact search %s after %d nodes: %.6g", status.value, search.nodes, search.best_key[0])
    return result_for(problem, code, data, status, watch, penalized=True,
                      first_feasible_ms=search.first_feasible_ms, nodes=search.nodes)
