"""YAML run configuration: schema validation, defaults, scenario assembly.

An empty file (or missing sections) resolves to the stiff-table wiping setup
with the default gain/tank row.  Unknown keys anywhere are rejected with the
full key path so typos do not silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ific.baselines import DsParams, LpfParams
from ific.plant import (
    ARM_MOTION,
    GUIDANCE,
    HOLD,
    IMPULSE,
    LIFT,
    SHAKE,
    EnvironmentModel,
    HumanScript,
    ScriptSegment,
)
from ific.scenarios import (
    CONTROLLERS,
    SCENARIOS,
    ExperimentParams,
    ScenarioConfig,
    TaskParams,
    make_controller,
)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run setup: scenario plus controller selection."""

    scenario: ScenarioConfig
    controller: str = "ific"
    lpf: LpfParams = field(default_factory=LpfParams)
    ds: DsParams = field(default_factory=DsParams)
    out_path: str | None = None

    def build_controller(self, name: str | None = None):
        return make_controller(
            name or self.controller, self.scenario.params, lpf=self.lpf, ds=self.ds
        )


_SEGMENT_KINDS = (IMPULSE, SHAKE, GUIDANCE, LIFT, HOLD, ARM_MOTION)


def _take(section: dict, path: str, allowed: dict) -> dict:
    """Pop known keys (with defaults applied); reject anything left over."""
    out = dict(allowed)
    for key in list(section):
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key!r} (expected one of {sorted(allowed)})")
        out[key] = section.pop(key)
    return out


def _section(data: dict, name: str) -> dict:
    value = data.pop(name, {}) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return value


def _defaults(cls) -> dict:
    out = {}
    for f in dataclasses.fields(cls):
        if f.default is not dataclasses.MISSING:
            out[f.name] = f.default
    return out


def _parse_segment(index: int, raw: dict) -> ScriptSegment:
    path = f"script[{index}]"
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must be a mapping")
    raw = dict(raw)
    spec = _take(raw, path, {
        "t_start": None, "t_end": None, "kind": None,
        "direction": (0.0, 1.0, 0.0), "peak": 0.0, "freq": 1.0,
        "profile": (), "k_h": 2000.0, "f_max": 150.0, "d_h": 0.0,
        "sensed": True,
    })
    for req in ("t_start", "t_end", "kind"):
        if spec[req] is None:
            raise ConfigError(f"{path} needs {req!r}")
    if spec["kind"] not in _SEGMENT_KINDS:
        raise ConfigError(f"{path}.kind must be one of {_SEGMENT_KINDS}")
    profile = tuple((float(t), float(v)) for t, v in spec["profile"])
    return ScriptSegment(
        t_start=float(spec["t_start"]), t_end=float(spec["t_end"]), kind=spec["kind"],
        direction=tuple(float(v) for v in spec["direction"]),
        peak=float(spec["peak"]), freq=float(spec["freq"]), profile=profile,
        k_h=float(spec["k_h"]), f_max=float(spec["f_max"]), d_h=float(spec["d_h"]),
        sensed=bool(spec["sensed"]),
    )


def parse_config(path: str | Path) -> RunConfig:
    """Load and validate a YAML run configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from err
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: invalid YAML: {err}") from err
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return resolve_config(data, source=str(path))


def resolve_config(data: dict, source: str = "<dict>") -> RunConfig:
    """Validate an already-loaded mapping and assemble the run setup."""
    data = dict(data)
    version = data.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{source}: unsupported schema_version {version!r}")

    scenario_name = data.pop("scenario", "wiping")
    controller = data.pop("controller", "ific")
    if controller not in CONTROLLERS:
        raise ConfigError(f"{source}: controller must be one of {CONTROLLERS}")
    duration = data.pop("duration", None)
    noise = _take(_section(data, "noise"), "noise", {"std": 0.0, "seed": 0})
    out_path = data.pop("out", None)

    params_section = _section(data, "params")
    have_params = bool(params_section)
    params_spec = _take(params_section, "params", _defaults(ExperimentParams))
    params = ExperimentParams(**{f.name: params_spec[f.name] for f in dataclasses.fields(ExperimentParams)})

    task_spec = _section(data, "task")
    env_spec = _section(data, "environment")
    script_raw = data.pop("script", None)
    lpf_spec = _take(_section(data, "lpf"), "lpf", _defaults(LpfParams))
    ds_spec = _take(_section(data, "ds"), "ds", _defaults(DsParams))
    safety_bound = data.pop("safety_bound", None)
    event_time = data.pop("event_time", None)
    if data:
        raise ConfigError(f"{source}: unknown top-level keys {sorted(data)}")

    if scenario_name not in SCENARIOS:
        raise ConfigError(f"{source}: scenario must be one of {sorted(SCENARIOS)}")
    scenario = SCENARIOS[scenario_name](params=params if have_params else None)

    replacements: dict = {}
    if duration is not None:
        replacements["duration"] = float(duration)
    if noise["std"]:
        replacements["noise_std"] = float(noise["std"])
    replacements["noise_seed"] = int(noise["seed"])
    if task_spec:
        task_fields = _take(dict(task_spec), "task",
                            {f.name: getattr(scenario.task, f.name)
                             for f in dataclasses.fields(TaskParams)})
        replacements["task"] = TaskParams(**task_fields)
    if env_spec:
        env_fields = _take(dict(env_spec), "environment",
                           {f.name: getattr(scenario.environment, f.name)
                            for f in dataclasses.fields(EnvironmentModel)})
        replacements["environment"] = EnvironmentModel(**env_fields)
    if script_raw is not None:
        if not isinstance(script_raw, list):
            raise ConfigError(f"{source}: script must be a list of segments")
        segments = tuple(_parse_segment(i, seg) for i, seg in enumerate(script_raw))
        replacements["script"] = HumanScript(segments=segments)
    if safety_bound is not None:
        replacements["safety_bound"] = float(safety_bound)
    if event_time is not None:
        replacements["event_time"] = float(event_time)

    scenario = dataclasses.replace(scenario, **replacements)
    return RunConfig(
        scenario=scenario,
        controller=controller,
        lpf=LpfParams(**lpf_spec),
        ds=DsParams(**ds_spec),
        out_path=out_path,
    )
