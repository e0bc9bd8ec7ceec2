"""Experiment config files: schema validation with close-match suggestions for unknown keys."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import toml
from fuzzywuzzy import process

from src.algos.config import RunConfig
from src.bench.generators import INSTANCE_SOURCE_KEYS
from src.bench.sweep import ExperimentSpec
from src.config.constants import DEFAULT_OUTPUT_DIR
from src.utils.errors import ConfigError
from src.utils.file_io import read_json

TOP_LEVEL_KEYS = ("experiment", "instance", "algorithms", "t_grid", "output_dir")
EXPERIMENT_KEYS = ("name", "seed", "replications")
ALGORITHM_KEYS = tuple(RunConfig.field_names()) + ("label",)
SUGGESTION_SCORE = 75


def _suggest(key: str, valid) -> str:
    match = process.extractOne(key, list(valid))
    if match and match[1] >= SUGGESTION_SCORE:
        return f" (did you mean '{match[0]}'?)"
    return ""


def _check_keys(block: dict, valid, path: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"'{path}' must be a table/object")
    for key in block:
        if key not in valid:
            dotted = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key '{dotted}'{_suggest(key, valid)}")


@dataclass
class CliConfig:
    name: str
    seed: int
    replications: int
    instance: dict
    algorithms: list
    t_grid: list = field(default_factory=list)
    output_dir: str = DEFAULT_OUTPUT_DIR
    overrides: dict = field(default_factory=dict)

    def to_experiment_spec(self) -> ExperimentSpec:
        return ExperimentSpec(
            name=self.name,
            instance=self.instance,
            t_grid=self.t_grid,
            algorithms=self.algorithms,
            replications=self.replications,
            seed=self.seed,
            output_dir=self.output_dir,
        )


def validate_config(payload: dict) -> CliConfig:
    """Checks every key against the schema; unknown keys name their dotted path."""
    _check_keys(payload, TOP_LEVEL_KEYS, "")
    experiment = payload.get("experiment", {})
    _check_keys(experiment, EXPERIMENT_KEYS, "experiment")
    instance = payload.get("instance", {"generator": "canonical"})
    _check_keys(instance, INSTANCE_SOURCE_KEYS, "instance")

    algorithms = payload.get("algorithms", [])
    if not isinstance(algorithms, list) or not algorithms:
        raise ConfigError("'algorithms' must be a non-empty list")
    for index, entry in enumerate(algorithms):
        _check_keys(entry, ALGORITHM_KEYS, f"algorithms[{index}]")
        if "algorithm" not in entry:
            raise ConfigError(f"'algorithms[{index}].algorithm' is required")
        RunConfig(**{k: v for k, v in entry.items() if k != "label"})

    t_grid = payload.get("t_grid", [])
    if not isinstance(t_grid, list) or any(not isinstance(t, int) or t < 2 for t in t_grid):
        raise ConfigError("'t_grid' must be a list of integers >= 2")
    replications = experiment.get("replications", 1)
    if not isinstance(replications, int) or replications < 1:
        raise ConfigError("'experiment.replications' must be an integer >= 1")

    return CliConfig(
        name=str(experiment.get("name", "experiment")),
        seed=int(experiment.get("seed", 0)),
        replications=replications,
        instance=dict(instance),
        algorithms=[dict(entry) for entry in algorithms],
        t_grid=list(t_grid),
        output_dir=str(payload.get("output_dir", DEFAULT_OUTPUT_DIR)),
    )


def load_config(path: str) -> CliConfig:
    """Reads a .json or .toml experiment config and validates it."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.endswith(".toml"):
            payload = toml.load(path)
        else:
            payload = read_json(path)
    except (ValueError, toml.TomlDecodeError) as e:
        raise ConfigError(f"could not parse {path}: {e}") from e
    return validate_config(payload)
