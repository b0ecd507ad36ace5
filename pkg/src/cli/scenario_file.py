"""
Scenario files.
JSON documents describing the flow, the workers, cost parameters, the
strategy and run timing. Syntax errors report the JSON line and column,
validation errors the dotted path of the offending field.
"""
import json
import logging
import math
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Mapping, Optional, Union

from ..cost.model import CostParams, Placement, WorkerProfile
from ..errors import ScenarioError
from ..flow.graph import last_step
from ..flow.model import RawSource, StepDef
from ..sim.config import DataSizeSchedule, ScenarioConfig
from ..solvers.base import Strategy
from ..solvers.genetic import GeneticParams

logger = logging.getLogger(__name__)

Converter = Callable[[Any, str], Any]


def _text(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ScenarioError(f"expected a string, got {value!r}", field=path)
    return value


def _finite(value: Any) -> bool:
    # huge JSON integers overflow the float conversion
    try:
        return math.isfinite(value)
    except OverflowError:
        return False


def _float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", field=path)
    if not _finite(value):
        raise ScenarioError(f"expected a finite number, got {value!r}", field=path)
    return float(value)


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected an integer, got {value!r}", field=path)
    if not _finite(value) or int(value) != value:
        raise ScenarioError(f"expected a finite integer, got {value!r}", field=path)
    return int(value)


def _optional(convert: Converter) -> Converter:
    def wrapped(value: Any, path: str) -> Any:
        return None if value is None else convert(value, path)
    return wrapped


def _topics(value: Any, path: str) -> tuple:
    if not isinstance(value, list):
        raise ScenarioError(f"expected a list of topics, got {value!r}", field=path)
    return tuple(_text(t, f"{path}[{i}]") for i, t in enumerate(value))


def _points(value: Any, path: str) -> tuple:
    if not isinstance(value, list):
        raise ScenarioError("expected a list of [at_ms, bytes_per_event] pairs", field=path)
    points = []
    for i, point in enumerate(value):
        if not isinstance(point, list) or len(point) != 2:
            raise ScenarioError("expected an [at_ms, bytes_per_event] pair", field=f"{path}[{i}]")
        points.append((_float(point[0], f"{path}[{i}][0]"), _int(point[1], f"{path}[{i}][1]")))
    return tuple(points)


def _assignment(value: Any, path: str) -> Dict[str, str]:
    if not isinstance(value, dict):
        raise ScenarioError("expected an object mapping ids to worker ids", field=path)
    return {k: _text(v, f"{path}.{k}") for k, v in value.items()}


WORKER_FIELDS: Dict[str, Converter] = {
    "id": _text,
    "cpu_factor": _float,
    "code_capacity": _int,
    "base_read_ms": _float,
    "base_write_ms": _float,
    "download_ms": _float,
    "subscribe_ms": _float,
    "read_ms_per_kib": _float,
    "write_ms_per_kib": _float,
}

SOURCE_FIELDS: Dict[str, Converter] = {
    "id": _text,
    "output_topic": _text,
    "bytes_per_event": _int,
    "period_ms": _float,
    "home_worker": _text,
    "label": _text,
}

STEP_FIELDS: Dict[str, Converter] = {
    "id": _text,
    "input_topics": _topics,
    "output_topic": _text,
    "fixed_ms": _float,
    "per_byte_ms": _float,
    "output_bytes": _optional(_int),
    "label": _text,
}

PARAM_FIELDS: Dict[str, Converter] = {
    "alpha": _float,
    "beta": _float,
    "device_change_penalty": _float,
    "solver_time_limit_ms": _int,
    "solver_node_limit": _optional(_int),
}

GENETIC_FIELDS: Dict[str, Converter] = {
    "population_size": _int,
    "generations": _int,
    "elite_count": _int,
    "mutation_share": _float,
    "mutation_probability": _float,
    "tournament_size": _int,
}

SCHEDULE_FIELDS: Dict[str, Converter] = {
    "source": _text,
    "points": _points,
}

PLACEMENT_FIELDS: Dict[str, Converter] = {
    "code_loc": _assignment,
    "data_loc": _assignment,
}

TOP_LEVEL = ("name", "strategy", "seed", "eval_period_ms", "run_duration_ms", "bandwidth_bytes_per_ms",
             "params", "genetic", "workers", "sources", "steps", "data_size_schedule", "initial_placement")


def _fields(raw: Any, path: str, converters: Mapping[str, Converter],
            required: Iterable[str] = ("id",)) -> Dict[str, Any]:
    if not isinstance(raw, dict):
        raise ScenarioError(f"expected an object, got {type(raw).__name__}", field=path)
    for key in raw:
        if key not in converters:
            raise ScenarioError(f"unknown field '{key}'", field=f"{path}.{key}" if path else key)
    for key in required:
        if key not in raw:
            raise ScenarioError("missing required field", field=f"{path}.{key}" if path else key)
    return {key: converters[key](value, f"{path}.{key}" if path else key) for key, value in raw.items()}


def _build(cls, raw: Any, path: str, converters: Mapping[str, Converter], required: Iterable[str] = ("id",)):
    values = _fields(raw, path, converters, required)
    try:
        return cls(**values)
    except ValueError as e:
        raise ScenarioError(str(e), field=path) from None


def _list(raw: Mapping[str, Any], key: str, required: bool = True) -> list:
    if key not in raw:
        if required:
            raise ScenarioError("missing required field", field=key)
        return []
    if not isinstance(raw[key], list):
        raise ScenarioError("expected a list", field=key)
    return raw[key]


def _strategy(value: Any) -> Strategy:
    text = _text(value, "strategy")
    try:
        return Strategy(text.upper())
    except ValueError:
        choices = ", ".join(s.value for s in Strategy)
        raise ScenarioError(f"unknown strategy '{text}' (expected one of {choices})", field="strategy") from None


def scenario_from_dict(raw: Any) -> ScenarioConfig:
    """
    Build a scenario from a decoded JSON document.

    Raises:
        ScenarioError: If a field is missing, unknown or invalid
        FlowGraphError: If the sources and steps do not form a flow with a single last step
    """
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key in raw:
        if key not in TOP_LEVEL:
            raise ScenarioError(f"unknown field '{key}'", field=key)

    kwargs: Dict[str, Any] = {
        "workers": tuple(_build(WorkerProfile, w, f"workers[{i}]", WORKER_FIELDS)
                         for i, w in enumerate(_list(raw, "workers"))),
        "sources": tuple(_build(RawSource, s, f"sources[{i}]", SOURCE_FIELDS,
                                ("id", "output_topic", "bytes_per_event", "period_ms", "home_worker"))
                         for i, s in enumerate(_list(raw, "sources"))),
        "steps": tuple(_build(StepDef, s, f"steps[{i}]", STEP_FIELDS, ("id", "input_topics", "output_topic"))
                       for i, s in enumerate(_list(raw, "steps"))),
    }
    schedules = []
    for i, entry in enumerate(_list(raw, "data_size_schedule", required=False)):
        values = _fields(entry, f"data_size_schedule[{i}]", SCHEDULE_FIELDS, ("source", "points"))
        try:
            schedules.append(DataSizeSchedule(values["source"], values["points"]))
        except ValueError as e:
            raise ScenarioError(str(e), field=f"data_size_schedule[{i}]") from None
    kwargs["data_size_schedule"] = tuple(schedules)

    if "params" in raw:
        kwargs["params"] = _build(CostParams, raw["params"], "params", PARAM_FIELDS, ())
    if "genetic" in raw:
        kwargs["genetic"] = _build(GeneticParams, raw["genetic"], "genetic", GENETIC_FIELDS, ())
    if raw.get("initial_placement") is not None:
        kwargs["initial_placement"] = _build(Placement, raw["initial_placement"], "initial_placement",
                                             PLACEMENT_FIELDS, ("code_loc", "data_loc"))
    if "strategy" in raw:
        kwargs["strategy"] = _strategy(raw["strategy"])
    if "name" in raw:
        kwargs["name"] = _text(raw["name"], "name")
    if "seed" in raw:
        kwargs["seed"] = _int(raw["seed"], "seed")
    for key in ("eval_period_ms", "run_duration_ms", "bandwidth_bytes_per_ms"):
        if key in raw:
            kwargs[key] = _float(raw[key], key)

    config = ScenarioConfig(**kwargs)
    last_step(config.build_graph())
    return config


def scenario_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    """Canonical document of a scenario; every field is written, defaults included"""
    def step_dict(step: StepDef) -> Dict[str, Any]:
        raw = asdict(step)
        raw["input_topics"] = list(step.input_topics)
        return raw

    return {
        "name": config.name,
        "strategy": config.strategy.value,
        "seed": config.seed,
        "eval_period_ms": float(config.eval_period_ms),
        "run_duration_ms": float(config.run_duration_ms),
        "bandwidth_bytes_per_ms": float(config.bandwidth_bytes_per_ms),
        "params": asdict(config.params),
        "genetic": asdict(config.genetic),
        "workers": [asdict(w) for w in config.workers],
        "sources": [asdict(s) for s in config.sources],
        "steps": [step_dict(s) for s in config.steps],
        "data_size_schedule": [
            {"source": s.source_id, "points": [[t, b] for t, b in s.points]} for s in config.data_size_schedule
        ],
        "initial_placement": config.initial_placement.to_dict() if config.initial_placement else None,
    }


def parse_scenario(text: str) -> ScenarioConfig:
    """
    Parse the JSON text of a scenario file.

    Raises:
        ScenarioError: On invalid JSON (with line number) or invalid fields (with field path)
        FlowGraphError: If the flow is not a DAG with a single last step
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON: {e.msg} (column {e.colno})", line=e.lineno) from None
    return scenario_from_dict(raw)


def render_scenario(config: ScenarioConfig) -> str:
    return json.dumps(scenario_to_dict(config), indent=2) + "\n"


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file '{path}': {e.strerror}") from None
    config = parse_scenario(text)
    logger.debug("Loaded scenario '%s' from %s: %d sources, %d steps, %d workers", config.name, path,
                 len(config.sources), len(config.steps), len(config.workers))
    return config


def save_scenario(config: ScenarioConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(render_scenario(config))
