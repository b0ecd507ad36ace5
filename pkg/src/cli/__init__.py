from .scenario_file import (
    parse_scenario,
    render_scenario,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict
)
from .commands import (
    cmd_run,
    cmd_sweep,
    cmd_scale,
    sweep_configs,
    table_labels,
    scale_request,
    write_run,
    exit_code_for,
    EXIT_OK,
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_INTERNAL,
    SWEEP_PENALTIES,
    CPU_FACTORS
)
from .main import main, build_parser

__all__ = [
    'parse_scenario',
    'render_scenario',
    'load_scenario',
    'save_scenario',
    'scenario_from_dict',
    'scenario_to_dict',
    'cmd_run',
    'cmd_sweep',
    'cmd_scale',
    'sweep_configs',
    'table_labels',
    'scale_request',
    'write_run',
    'exit_code_for',
    'EXIT_OK',
    'EXIT_CONFIG',
    'EXIT_INFEASIBLE',
    'EXIT_INTERNAL',
    'SWEEP_PENALTIES',
    'CPU_FACTORS',
    'main',
    'build_parser'
]
