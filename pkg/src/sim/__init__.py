from .config import (
    ScenarioConfig,
    DataSizeSchedule,
    strategy_label,
    DEFAULT_EVAL_PERIOD_MS,
    DEFAULT_RUN_DURATION_MS,
    DEFAULT_BANDWIDTH_BYTES_PER_MS,
    SIM_NODE_LIMIT
)
from .events import EventKind, SimEvent, EventQueue, dump_event_log, load_event_log
from .vsm import Datum, VsmState
from .stats import ExecutionRecord, summarize, collect_window_stats, prior_window_stats
from .engine import Simulator, SimulationRun, SolverWindow, run_simulation, window_seed

__all__ = [
    'ScenarioConfig',
    'DataSizeSchedule',
    'strategy_label',
    'DEFAULT_EVAL_PERIOD_MS',
    'DEFAULT_RUN_DURATION_MS',
    'DEFAULT_BANDWIDTH_BYTES_PER_MS',
    'SIM_NODE_LIMIT',
    'EventKind',
    'SimEvent',
    'EventQueue',
    'dump_event_log',
    'load_event_log',
    'Datum',
    'VsmState',
    'ExecutionRecord',
    'summarize',
    'collect_window_stats',
    'prior_window_stats',
    'Simulator',
    'SimulationRun',
    'SolverWindow',
    'run_simulation',
    'window_seed'
]
