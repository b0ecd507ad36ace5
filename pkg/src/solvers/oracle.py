"""
Exhaustive reference solver.
Enumerates every code and data assignment of a small instance; used to check
the exact search.
"""
import itertools
import logging

import numpy as np

from ..errors import Infeasible, InstanceTooLarge
from .base import SolveRequest, SolveResult, SolveStatus, Stopwatch, result_for

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 10 ** 7


def brute_force_oracle(req: SolveRequest, limit: int = ORACLE_LIMIT) -> SolveResult:
    """
    True optimum of the exact search objective by enumeration.

    Every capacity-respecting code assignment is paired with all data
    assignments, which are evaluated as one numpy batch. Ties keep the
    first candidate in enumeration order.

    Raises:
        InstanceTooLarge: If workers^(steps + producers) exceeds the limit
        Infeasible: If no code assignment respects capacities
    """
    watch = Stopwatch()
    problem = req.compile()
    size = problem.n_workers ** (problem.n_steps + problem.n_producers)
    if size > limit:
        raise InstanceTooLarge(size, limit)

    data_grid = np.array(list(itertools.product(range(problem.n_workers), repeat=problem.n_producers)), dtype=int)
    data_grid = data_grid.reshape(-1, problem.n_producers)
    best = None
    visited = 0
    for code in itertools.product(range(problem.n_workers), repeat=problem.n_steps):
        code = np.array(code, dtype=int)
        if not problem.capacity_ok(code)[0]:
            continue
        codes = np.broadcast_to(code, (len(data_grid), problem.n_steps))
        worst, total, _ = problem.evaluate(codes, data_grid, penalized=True)
        visited += len(data_grid)
        i = int(np.lexsort((total, worst))[0])
        key = (float(worst[i]), float(total[i]))
        if best is None or key < best[0]:
            best = (key, code, data_grid[i].copy())

    if best is None:
        raise Infeasible("No code assignment respects worker capacities")
    logger.debug("Oracle enumerated %d placements, optimum %.6g", visited, best[0][0])
    return result_for(problem, best[1], best[2], SolveStatus.OPTIMAL, watch, penalized=True, nodes=visited)
