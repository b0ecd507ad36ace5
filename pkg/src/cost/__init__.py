from .model import (
    WorkerProfile,
    Placement,
    StepStats,
    StatsWindow,
    CostParams,
    penalty_label
)
from .equations import (
    step_latency,
    path_latency,
    step_cost,
    path_cost,
    critical_path,
    activation_cost
)
from .compiled import CompiledProblem

__all__ = [
    'WorkerProfile',
    'Placement',
    'StepStats',
    'StatsWindow',
    'CostParams',
    'penalty_label',
    'step_latency',
    'path_latency',
    'step_cost',
    'path_cost',
    'critical_path',
    'activation_cost',
    'CompiledProblem'
]
