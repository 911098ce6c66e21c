#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: config
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 4/12/2023

Experiment definitions. A definition is a TOML file (or JSON, picked by the .json suffix):

    experiment = "theorem1-frequency"
    seed = 7
    trials = 100
    schedule = [12100]          # sample counts T; optional for theorem1-frequency
    output = "runs/theorem1"
    threads = 4                 # optional

    [instance]
    n = 20
    eps = 0.15
    delta = 0.2
    objective = "welfare"
    change_points = [5, 10]     # correlated-hardness, goodset-fuzz
    bits = "random:3"           # or ["High", "Low", ...]
    max_support = 5             # random product instances
    file = "smoke.json"         # optional instance file, relative to the definition

A meta.json written by a run is accepted as well; its "config" entry is the resolved definition.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple, Union

import tomli

from pricelearning.core.diagnostics import theorem1_sample_size
from pricelearning.enums import Bit, Experiment, Objective
from pricelearning.exceptions import ConfigError

logger = logging.getLogger(__name__)

MAX_SEED = (1 << 64) - 1
DEFAULT_MAX_SUPPORT = 5
DEFAULT_GRANULARITY = 1e-3
DEFAULT_FUZZ_CASES = 100
FILE_EXPERIMENTS = (Experiment.REGRET_CURVE, Experiment.THEOREM1_FREQUENCY)

TOP_LEVEL_KEYS = {"experiment", "seed", "trials", "schedule", "output", "threads", "instance"}
INSTANCE_KEYS = {
    "n",
    "eps",
    "delta",
    "objective",
    "change_points",
    "bits",
    "max_support",
    "granularity",
    "instance_seed",
    "file",
}


@dataclass(frozen=True)
class InstanceConfig:
    n: Optional[int] = None
    eps: float = 0.1
    delta: float = 0.1
    objective: Objective = Objective.WELFARE
    change_points: Tuple[int, ...] = ()
    bits: Union[str, Tuple[str, ...], None] = None
    max_support: int = DEFAULT_MAX_SUPPORT
    granularity: float = DEFAULT_GRANULARITY
    instance_seed: Optional[int] = None
    file: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    seed: int
    trials: int
    schedule: Tuple[int, ...]
    output: str
    instance: InstanceConfig = field(default_factory=InstanceConfig)
    threads: Optional[int] = None

    def to_dict(self):
        """Plain-JSON form; feeding it back through ``config_from_dict`` gives an equal config."""
        d = asdict(self)
        d["experiment"] = self.experiment.value
        d["schedule"] = list(self.schedule)
        inst = d["instance"]
        inst["objective"] = self.instance.objective.value
        inst["change_points"] = list(self.instance.change_points)
        if isinstance(self.instance.bits, tuple):
            inst["bits"] = list(self.instance.bits)
        return d


def _require_int(value, name, minimum=1, maximum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(name, f"must be at least {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(name, f"must be at most {maximum}, got {value}")
    return value


def _require_unit(value, name, upper_closed=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    value = float(value)
    if not (0.0 < value < 1.0 or (upper_closed and value == 1.0)):
        raise ConfigError(name, f"must lie in (0, 1), got {value}")
    return value


def _instance_from_dict(d, base_dir):
    if not isinstance(d, dict):
        raise ConfigError("instance", "expected a table")
    unknown = set(d) - INSTANCE_KEYS
    if unknown:
        raise ConfigError(f"instance.{sorted(unknown)[0]}", "unknown key")

    kwargs = {}
    if "n" in d:
        kwargs["n"] = _require_int(d["n"], "instance.n")
    if "eps" in d:
        kwargs["eps"] = _require_unit(d["eps"], "instance.eps")
    if "delta" in d:
        kwargs["delta"] = _require_unit(d["delta"], "instance.delta")
    if "objective" in d:
        try:
            kwargs["objective"] = Objective(d["objective"])
        except ValueError:
            raise ConfigError(
                "instance.objective", f"expected 'welfare' or 'revenue', got {d['objective']!r}"
            ) from None
    if "change_points" in d:
        points = d["change_points"]
        if not isinstance(points, list):
            raise ConfigError("instance.change_points", "expected a list of integers")
        kwargs["change_points"] = tuple(
            _require_int(p, f"instance.change_points[{j}]") for j, p in enumerate(points)
        )
    if "bits" in d:
        bits = d["bits"]
        if isinstance(bits, str):
            if not bits.startswith("random:") or not bits[len("random:") :].isdigit():
                raise ConfigError("instance.bits", f"expected 'random:<seed>', got {bits!r}")
            kwargs["bits"] = bits
        elif isinstance(bits, list):
            try:
                kwargs["bits"] = tuple(Bit(str(b).capitalize()).value for b in bits)
            except ValueError:
                raise ConfigError("instance.bits", "entries must be 'High' or 'Low'") from None
        else:
            raise ConfigError("instance.bits", "expected a list or 'random:<seed>'")
    if "max_support" in d:
        kwargs["max_support"] = _require_int(d["max_support"], "instance.max_support")
    if "granularity" in d:
        kwargs["granularity"] = _require_unit(d["granularity"], "instance.granularity")
    if "instance_seed" in d:
        kwargs["instance_seed"] = _require_int(
            d["instance_seed"], "instance.instance_seed", 0, MAX_SEED
        )
    if "file" in d:
        if not isinstance(d["file"], str):
            raise ConfigError("instance.file", "expected a path string")
        path = Path(d["file"])
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        # absolute, so a meta.json written elsewhere still finds the instance
        kwargs["file"] = str(path.resolve())
    return InstanceConfig(**kwargs)


def _check_experiment(cfg):
    inst = cfg.instance
    kind = cfg.experiment
    if inst.n is None and (inst.file is None or kind not in FILE_EXPERIMENTS):
        raise ConfigError("instance.n", "required unless instance.file is given")
    if kind is Experiment.THEOREM1_FREQUENCY and inst.objective is not Objective.WELFARE:
        raise ConfigError("instance.objective", "theorem1-frequency learns welfare only")
    if kind is Experiment.PRODUCT_HARDNESS:
        if inst.objective is not Objective.REVENUE:
            raise ConfigError("instance.objective", "product-hardness is a revenue instance")
        if inst.n is None or inst.n < 2:
            raise ConfigError("instance.n", "product-hardness needs n >= 2")
        if inst.eps > 1.0 / 32.0:
            raise ConfigError("instance.eps", f"must be at most 1/32, got {inst.eps}")
    if kind is Experiment.CORRELATED_HARDNESS and inst.eps >= 0.5:
        raise ConfigError("instance.eps", f"must lie in (0, 1/2), got {inst.eps}")
    if kind in (Experiment.CORRELATED_HARDNESS, Experiment.GOODSET_FUZZ) and inst.n is not None:
        for j, p in enumerate(inst.change_points):
            if not 1 <= p <= inst.n - 1:
                raise ConfigError(
                    f"instance.change_points[{j}]", f"must lie in [1, {inst.n - 1}], got {p}"
                )
        if any(b <= a for a, b in zip(inst.change_points, inst.change_points[1:])):
            raise ConfigError("instance.change_points", "must be strictly increasing")


def config_from_dict(d, base_dir=None):
    """Validate a parsed definition into an ExperimentConfig; raises ConfigError."""
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected a table of settings")
    if "config" in d and "version" in d:
        d = d["config"]
    unknown = set(d) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    if "experiment" not in d:
        raise ConfigError("experiment", "required")
    try:
        experiment = Experiment(d["experiment"])
    except ValueError:
        choices = ", ".join(e.value for e in Experiment)
        raise ConfigError(
            "experiment", f"expected one of {choices}, got {d['experiment']!r}"
        ) from None

    seed = _require_int(d.get("seed", 0), "seed", 0, MAX_SEED)
    trials = _require_int(d.get("trials", 1), "trials")
    output = d.get("output", "runs")
    if not isinstance(output, str) or not output:
        raise ConfigError("output", "expected a directory path")
    threads = d.get("threads")
    if threads is not None:
        threads = _require_int(threads, "threads")
    instance = _instance_from_dict(d.get("instance", {}), base_dir)
    if experiment is Experiment.PRODUCT_HARDNESS and "objective" not in d.get("instance", {}):
        instance = replace(instance, objective=Objective.REVENUE)

    schedule = d.get("schedule")
    if schedule is None:
        if experiment is Experiment.THEOREM1_FREQUENCY:
            schedule = [theorem1_sample_size(instance.eps, instance.delta)]
        elif experiment is Experiment.GOODSET_FUZZ:
            schedule = [DEFAULT_FUZZ_CASES]
        else:
            raise ConfigError("schedule", "required for this experiment")
    if not isinstance(schedule, list) or not schedule:
        raise ConfigError("schedule", "expected a nonempty list of sample counts")
    schedule = tuple(_require_int(t, f"schedule[{j}]") for j, t in enumerate(schedule))

    cfg = ExperimentConfig(experiment, seed, trials, schedule, output, instance, threads)
    _check_experiment(cfg)
    return cfg


def _decode(path):
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read()
    if path.suffix.lower() == ".json":
        try:
            return json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as err:
            message = f"line {err.lineno} column {err.colno}: {err.msg}"
            raise ConfigError(str(path), message) from None
    try:
        return tomli.loads(raw.decode("utf-8"))
    except tomli.TOMLDecodeError as err:
        raise ConfigError(str(path), str(err)) from None


def load_config(path, **overrides):
    """Read, validate and apply command-line ``overrides`` (seed, output, threads) that are set."""
    cfg = config_from_dict(_decode(path), base_dir=Path(path).parent)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if "seed" in overrides:
        _require_int(overrides["seed"], "seed", 0, MAX_SEED)
    if "threads" in overrides:
        _require_int(overrides["threads"], "threads")
    if overrides:
        cfg = replace(cfg, **overrides)
    logger.debug("loaded %s experiment from %s", cfg.experiment.value, path)
    return cfg
