"""
CEP Placement Toolkit
Models CEP flows as step DAGs, optimizes the joint code and data placement of
their steps over a set of workers and compares placement strategies in a
deterministic simulation of the running flow.
"""

from .errors import (
    CEPError,
    FlowGraphError,
    CycleDetected,
    UnboundTopic,
    DuplicateProducer,
    PathExplosion,
    AmbiguousSink,
    CostModelError,
    MissingStats,
    InvalidPlacement,
    SolverError,
    Infeasible,
    InstanceTooLarge,
    ScenarioError,
    MetricsError,
    EmptyLog
)
from .flow import RawSource, StepDef, FlowPath, FlowGraph, build_flow_graph, enumerate_paths, last_step
from .cost import (
    WorkerProfile,
    Placement,
    StepStats,
    StatsWindow,
    CostParams,
    step_latency,
    step_cost,
    path_cost,
    critical_path,
    CompiledProblem
)
from .solvers import (
    Strategy,
    SolveStatus,
    SolveRequest,
    SolveResult,
    solve,
    solve_exact,
    solve_ga,
    brute_force_oracle
)
from .sim import ScenarioConfig, DataSizeSchedule, Simulator, run_simulation
from .metrics import MetricsReport, build_report, compare_strategies

__all__ = [
    # Errors
    'CEPError',
    'FlowGraphError',
    'CycleDetected',
    'UnboundTopic',
    'DuplicateProducer',
    'PathExplosion',
    'AmbiguousSink',
    'CostModelError',
    'MissingStats',
    'InvalidPlacement',
    'SolverError',
    'Infeasible',
    'InstanceTooLarge',
    'ScenarioError',
    'MetricsError',
    'EmptyLog',

    # Flow model
    'RawSource',
    'StepDef',
    'FlowPath',
    'FlowGraph',
    'build_flow_graph',
    'enumerate_paths',
    'last_step',

    # Cost model
    'WorkerProfile',
    'Placement',
    'StepStats',
    'StatsWindow',
    'CostParams',
    'step_latency',
    'step_cost',
    'path_cost',
    'critical_path',
    'CompiledProblem',

    # Solvers
    'Strategy',
    'SolveStatus',
    'SolveRequest',
    'SolveResult',
    'solve',
    'solve_exact',
    'solve_ga',
    'brute_force_oracle',

    # Simulation
    'ScenarioConfig',
    'DataSizeSchedule',
    'Simulator',
    'run_simulation',

    # Metrics
    'MetricsReport',
    'build_report',
    'compare_strategies'
]

__version__ = '0.1.0'
