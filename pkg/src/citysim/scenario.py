"""Scenario files: the YAML surface over SimConfig.

A scenario file is a mapping with a required seed and population, plus
optional sections mirroring the config dataclasses. Trait vectors are
either full-length lists or name-to-value mappings (unnamed coordinates
default to 0.5). Unknown keys anywhere are an error, and every diagnostic
names the offending field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .core import ConfigurationError, InteractionMatrix, TraitVector
from .demographics import DemographicsParams
from .engine import MatchingConfig, PopulationGroup, SimConfig
from .matching import MatchMode
from .society import LearningRateSchedule

__all__ = [
    "Scenario",
    "load_scenario",
    "scenario_from_mapping",
    "dump_scenario",
    "normalize_scenario",
]

_NEUTRAL_LEVEL = 0.5


@dataclass(frozen=True)
class Scenario:
    """A named, runnable configuration plus its file-level extras."""

    name: str
    config: SimConfig
    out_dir: str | None = None
    preset: str | None = None
    interaction_source: str = "default"


def _require_mapping(obj, field: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{field}: expected a mapping, got {type(obj).__name__}")
    return obj


def _reject_unknown(data: dict, allowed: set[str], field: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigurationError(f"{field}: unknown key(s) {', '.join(unknown)}")


def _parse_trait_vector(value, names: tuple[str, ...], field: str) -> TraitVector:
    if isinstance(value, dict):
        bad = sorted(set(value) - set(names))
        if bad:
            raise ConfigurationError(f"{field}: unknown trait name(s) {', '.join(bad)}")
        vec = [float(value.get(n, _NEUTRAL_LEVEL)) for n in names]
    elif isinstance(value, (list, tuple)):
        if len(value) != len(names):
            raise ConfigurationError(
                f"{field}: expected {len(names)} values, got {len(value)}"
            )
        vec = [float(v) for v in value]
    else:
        raise ConfigurationError(
            f"{field}: expected a list of {len(names)} values or a name mapping"
        )
    for name, v in zip(names, vec):
        if not (0.0 <= v <= 1.0) or not math.isfinite(v):
            raise ConfigurationError(f"{field}.{name}: value {v} outside [0, 1]")
    return TraitVector(vec)


def _parse_number(data: dict, key: str, field: str, default, kind=float):
    if key not in data:
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{field}.{key}: expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigurationError(f"{field}.{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _parse_demographics(data: dict) -> DemographicsParams:
    field = "demographics"
    _require_mapping(data, field)
    allowed = {
        "lifespan_a",
        "lifespan_b",
        "gap_a",
        "gap_epsilon",
        "success_a",
        "success_scale",
        "mutation_prob",
        "maturity_age",
        "success_rule",
    }
    _reject_unknown(data, allowed, field)
    kwargs = {}
    for key in allowed - {"success_rule"}:
        if key in data:
            kwargs[key] = _parse_number(data, key, field, None)
    if "success_rule" in data:
        kwargs["success_rule"] = data["success_rule"]
    try:
        return DemographicsParams(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{field}: {exc}") from None


def _parse_matching(data: dict) -> MatchingConfig:
    field = "matching"
    _require_mapping(data, field)
    allowed = {"mode", "gamma", "partition_size", "noise_sigma", "distance"}
    _reject_unknown(data, allowed, field)
    kwargs = {}
    if "mode" in data:
        try:
            kwargs["mode"] = MatchMode(data["mode"])
        except ValueError:
            raise ConfigurationError(
                f"{field}.mode: {data['mode']!r} is not one of "
                f"{[m.value for m in MatchMode]}"
            ) from None
    for key, kind in (
        ("gamma", float),
        ("partition_size", int),
        ("noise_sigma", float),
    ):
        if key in data:
            kwargs[key] = _parse_number(data, key, field, None, kind)
    if "distance" in data:
        kwargs["distance"] = data["distance"]
    try:
        return MatchingConfig(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{field}: {exc}") from None


def _parse_schedule(data: dict) -> LearningRateSchedule:
    field = "schedule"
    _require_mapping(data, field)
    allowed = {"kind", "base", "multiplier", "flexibility_trait_index"}
    _reject_unknown(data, allowed, field)
    kwargs = {}
    if "kind" in data:
        kwargs["kind"] = data["kind"]
    for key, kind in (
        ("base", float),
        ("multiplier", float),
        ("flexibility_trait_index", int),
    ):
        if key in data:
            kwargs[key] = _parse_number(data, key, field, None, kind)
    try:
        return LearningRateSchedule(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{field}: {exc}") from None


def _parse_population(data, interaction: InteractionMatrix) -> tuple[PopulationGroup, ...]:
    if not isinstance(data, list) or not data:
        raise ConfigurationError("population: expected a nonempty list of groups")
    groups = []
    for i, entry in enumerate(data):
        field = f"population[{i}]"
        _require_mapping(entry, field)
        _reject_unknown(entry, {"count", "mean", "std"}, field)
        if "count" not in entry or "mean" not in entry:
            raise ConfigurationError(f"{field}: count and mean are required")
        count = _parse_number(entry, "count", field, None, int)
        mean = _parse_trait_vector(entry["mean"], interaction.row_names, f"{field}.mean")
        std = entry.get("std", 0.1)
        if isinstance(std, (list, tuple)):
            std = tuple(float(s) for s in std)
        elif isinstance(std, (int, float)) and not isinstance(std, bool):
            std = float(std)
        else:
            raise ConfigurationError(f"{field}.std: expected a number or list")
        try:
            groups.append(PopulationGroup(count=count, mean=mean, std=std))
        except ConfigurationError as exc:
            raise ConfigurationError(f"{field}: {exc}") from None
    return tuple(groups)


_ROOT_KEYS = {
    "name",
    "seed",
    "population",
    "theta0",
    "interaction",
    "demographics",
    "matching",
    "schedule",
    "mating_period",
    "max_time",
    "grid",
    "log_every",
    "success_pop_scope",
    "out",
    "preset",
}


def scenario_from_mapping(
    data: dict, name_default: str = "scenario", base_dir: Path | None = None
) -> Scenario:
    """Resolve a parsed mapping into a Scenario; diagnostics name fields."""
    _require_mapping(data, "scenario")
    _reject_unknown(data, _ROOT_KEYS, "scenario")
    if "seed" not in data:
        raise ConfigurationError("seed: required")
    seed = _parse_number(data, "seed", "scenario", None, int)

    source = data.get("interaction", "default")
    if not isinstance(source, str):
        raise ConfigurationError("interaction: expected 'default' or a CSV path")
    if source == "default":
        interaction = InteractionMatrix.default()
    else:
        csv_path = Path(source)
        if not csv_path.is_absolute() and base_dir is not None:
            csv_path = base_dir / csv_path
        if not csv_path.exists():
            raise ConfigurationError(f"interaction: file not found: {csv_path}")
        interaction = InteractionMatrix.from_csv(csv_path)
        source = str(csv_path)

    if "population" not in data:
        raise ConfigurationError("population: required")
    groups = _parse_population(data["population"], interaction)

    if "theta0" in data:
        theta0 = _parse_trait_vector(data["theta0"], interaction.col_names, "theta0")
    else:
        theta0 = TraitVector([_NEUTRAL_LEVEL] * interaction.society_dim)

    grid = None
    if data.get("grid") is not None:
        raw = data["grid"]
        if not isinstance(raw, (list, tuple)) or len(raw) != 2:
            raise ConfigurationError("grid: expected [width, height]")
        grid = (int(raw[0]), int(raw[1]))

    scope = data.get("success_pop_scope", "global")
    try:
        config = SimConfig(
            seed=seed,
            groups=groups,
            theta0=theta0,
            interaction=interaction,
            demographics=_parse_demographics(data.get("demographics", {})),
            matching=_parse_matching(data.get("matching", {})),
            schedule=_parse_schedule(data.get("schedule", {})),
            mating_period=_parse_number(data, "mating_period", "scenario", 1.0),
            max_time=_parse_number(data, "max_time", "scenario", 10_000.0),
            grid=grid,
            log_every=_parse_number(data, "log_every", "scenario", 1, int),
            success_pop_scope=scope if isinstance(scope, str) else str(scope),
        )
    except ConfigurationError:
        raise
    name = data.get("name", name_default)
    if not isinstance(name, str) or not name:
        raise ConfigurationError("name: expected a nonempty string")
    out_dir = data.get("out")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigurationError("out: expected a path string")
    preset = data.get("preset")
    if preset is not None and not isinstance(preset, str):
        raise ConfigurationError("preset: expected a string")
    return Scenario(
        name=name,
        config=config,
        out_dir=out_dir,
        preset=preset,
        interaction_source=source,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate one scenario file."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"scenario file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: parse error: {exc}") from None
    if data is None:
        raise ConfigurationError(f"{path}: file is empty")
    return scenario_from_mapping(data, name_default=path.stem, base_dir=path.parent)


def dump_scenario(scenario: Scenario) -> str:
    """Canonical YAML for a Scenario: every field explicit, vectors as lists.

    load(dump(s)) resolves back to an equal Scenario, and dumping is
    idempotent, which is what makes the normalized form usable as a
    round-trip oracle.
    """
    cfg = scenario.config
    d = cfg.demographics
    m = cfg.matching
    s = cfg.schedule
    doc: dict = {
        "name": scenario.name,
        "seed": cfg.seed,
        "theta0": [float(v) for v in cfg.theta0.values],
        "population": [
            {
                "count": g.count,
                "mean": [float(v) for v in g.mean.values],
                "std": list(g.std),
            }
            for g in cfg.groups
        ],
        "interaction": scenario.interaction_source,
        "demographics": {
            "lifespan_a": d.lifespan_a,
            "lifespan_b": d.lifespan_b,
            "gap_a": d.gap_a,
            "gap_epsilon": d.gap_epsilon,
            "success_a": d.success_a,
            "success_scale": d.success_scale,
            "mutation_prob": d.mutation_prob,
            "maturity_age": d.maturity_age,
            "success_rule": d.success_rule,
        },
        "matching": {
            "mode": m.mode.value,
            "gamma": m.gamma,
            "partition_size": m.partition_size,
            "noise_sigma": m.noise_sigma,
            "distance": m.distance,
        },
        "schedule": {
            "kind": s.kind,
            "base": s.base,
            "multiplier": s.multiplier,
            "flexibility_trait_index": s.flexibility_trait_index,
        },
        "mating_period": cfg.mating_period,
        "max_time": cfg.max_time,
        "log_every": cfg.log_every,
        "success_pop_scope": cfg.success_pop_scope,
    }
    if cfg.grid is not None:
        doc["grid"] = [cfg.grid[0], cfg.grid[1]]
    if scenario.out_dir is not None:
        doc["out"] = scenario.out_dir
    if scenario.preset is not None:
        doc["preset"] = scenario.preset
    return yaml.safe_dump(doc, sort_keys=False)


def normalize_scenario(path: str | Path) -> str:
    """The canonical text of a scenario file."""
    return dump_scenario(load_scenario(path))
