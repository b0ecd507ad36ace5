from .model import Topic, RawSource, StepDef, FlowPath
from .graph import (
    FlowGraph,
    build_flow_graph,
    enumerate_paths,
    last_step,
    DEFAULT_PATH_LIMIT
)
from .presets import chain_flow, diamond_flow, layered_flow, random_flow

__all__ = [
    'Topic',
    'RawSource',
    'StepDef',
    'FlowPath',
    'FlowGraph',
    'build_flow_graph',
    'enumerate_paths',
    'last_step',
    'DEFAULT_PATH_LIMIT',
    'chain_flow',
    'diamond_flow',
    'layered_flow',
    'random_flow'
]
