"""
Strategy dispatch.
Maps a Strategy to the function implementing it.
"""
import logging
from typing import Callable, Dict, Optional

from .base import SolveRequest, SolveResult, Strategy
from .exact import solve_exact
from .genetic import GeneticParams, solve_ga
from .heuristics import solve_crrb, solve_local, solve_random

logger = logging.getLogger(__name__)

SOLVERS: Dict[Strategy, Callable[[SolveRequest], SolveResult]] = {
    Strategy.CP: solve_exact,
    Strategy.GA: solve_ga,
    Strategy.CRRB: solve_crrb,
    Strategy.RANDOM: solve_random,
    Strategy.LOCAL: solve_local,
}


def solve(strategy: Strategy, req: SolveRequest, genetic: Optional[GeneticParams] = None) -> SolveResult:
    """
    Run one strategy.

    Args:
        strategy: Strategy to run; STATIC has no solver of its own
        req: The solve request
        genetic: Genetic algorithm settings, GA only

    Raises:
        ValueError: For STATIC
        Infeasible: If the strategy cannot place every step
    """
    if strategy is Strategy.GA and genetic is not None:
        result = solve_ga(req, genetic)
    elif strategy in SOLVERS:
        result = SOLVERS[strategy](req)
    else:
        raise ValueError(f"Strategy {strategy.value} keeps its placement and has no solver")
    logger.debug("%s: %s objective %.6g in %d ms", strategy.value, result.status.value, result.objective,
                 result.elapsed_ms)
    return result
