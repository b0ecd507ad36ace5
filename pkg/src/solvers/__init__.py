from .base import Strategy, SolveStatus, SolveRequest, SolveResult
from .exact import solve_exact
from .oracle import brute_force_oracle, ORACLE_LIMIT
from .genetic import GeneticParams, solve_ga, fitness
from .heuristics import (
    solve_crrb,
    solve_random,
    solve_local,
    round_robin_placement,
    balanced_assignment,
    LOCAL_CODE_CAPACITY
)
from .dispatch import solve

__all__ = [
    'Strategy',
    'SolveStatus',
    'SolveRequest',
    'SolveResult',
    'solve_exact',
    'brute_force_oracle',
    'ORACLE_LIMIT',
    'GeneticParams',
    'solve_ga',
    'fitness',
    'solve_crrb',
    'solve_random',
    'solve_local',
    'round_robin_placement',
    'balanced_assignment',
    'LOCAL_CODE_CAPACITY',
    'solve'
]
