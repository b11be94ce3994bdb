"""
Run configuration: one JSON document with unit-suffixed field names.

Sections map onto frozen dataclasses; the requirement, propagation and GA
sections reuse the library's own parameter types so a config is validated by
the same checks the library applies.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from Common.errors import ConfigError, InvalidInputError
from Geo.propagation import PropagationParams
from Objectives.fitness import OBJECTIVE_NAMES
from Objectives.objectives import check_weights
from Objectives.requirements import AFFECT_LOS, AFFECT_LOS_JSR, ObjectiveRequirements
from Optimizer.nsga2 import GaConfig

SCENARIO_SCRATCH = "scratch"
SCENARIO_AUGMENT = "augment"
PATTERN_LATTICE = "lattice"
PATTERN_UNIFORM = "uniform"
PATTERN_GRID = "grid"

EQUAL_THIRDS = (1 / 3, 1 / 3, 1 / 3)


@dataclass(frozen=True)
class AreaConfig:
    lat_low_deg: float = 47.4
    lat_up_deg: float = 51.4
    lon_low_deg: float = 5.71
    lon_up_deg: float = 9.71
    altitude_levels_m: tuple[float, ...] = (3000.0, 6000.0, 10000.0)
    lat_count: int = 20
    lon_count: int = 20

    def __post_init__(self):
        if not -90.0 <= self.lat_low_deg < self.lat_up_deg <= 90.0:
            raise ConfigError("need -90 <= lat_low_deg < lat_up_deg <= 90", "area.lat_low_deg")
        if not -180.0 <= self.lon_low_deg < self.lon_up_deg <= 180.0:
            raise ConfigError("need -180 <= lon_low_deg < lon_up_deg <= 180", "area.lon_low_deg")
        levels = self.altitude_levels_m
        if not levels or any(h <= 0 for h in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ConfigError("must be non-empty, positive and strictly increasing", "area.altitude_levels_m")
        if self.lat_count < 2 or self.lon_count < 2:
            raise ConfigError("grid counts must be >= 2", "area.lat_count")


@dataclass(frozen=True)
class CandidateConfig:
    count: int = 400
    pattern: str = PATTERN_LATTICE
    antenna_height_m: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("must be >= 1", "candidates.count")
        if self.pattern not in (PATTERN_LATTICE, PATTERN_UNIFORM):
            raise ConfigError(f"unknown pattern {self.pattern!r}", "candidates.pattern")
        if self.antenna_height_m < 0:
            raise ConfigError("must be >= 0", "candidates.antenna_height_m")


@dataclass(frozen=True)
class JammerConfig:
    count: int = 75
    heights_m: tuple[float, ...] = (3000.0, 6000.0, 10000.0)
    pattern: str = PATTERN_GRID
    seed: int = 0
    power_w: float = 10.0
    antenna_gain: float = 1.0
    transmitter_power_w: float = 250.0
    transmitter_gain: float = 1.0
    affect_rule: str = AFFECT_LOS
    jsr_threshold: float = 1.0
    reference_range_km: float = 150.0

    def __post_init__(self):
        if self.count < 0:
            raise ConfigError("must be >= 0", "jammers.count")
        if not self.heights_m or any(h < 0 for h in self.heights_m):
            raise ConfigError("must be a non-empty list of heights >= 0", "jammers.heights_m")
        if self.pattern not in (PATTERN_GRID, PATTERN_UNIFORM):
            raise ConfigError(f"unknown pattern {self.pattern!r}", "jammers.pattern")
        if self.pattern == PATTERN_GRID and self.count % len(self.heights_m):
            raise ConfigError(f"{self.count} jammers do not split evenly over {len(self.heights_m)} heights",
                              "jammers.count")
        if self.affect_rule not in (AFFECT_LOS, AFFECT_LOS_JSR):
            raise ConfigError(f"unknown affect rule {self.affect_rule!r}", "jammers.affect_rule")
        for name in ("power_w", "antenna_gain", "transmitter_power_w", "transmitter_gain",
                     "jsr_threshold", "reference_range_km"):
            if not getattr(self, name) > 0:
                raise ConfigError("must be > 0", f"jammers.{name}")


@dataclass(frozen=True)
class ObjectiveConfig:
    active: tuple[str, ...] = OBJECTIVE_NAMES
    direction_weights: tuple[float, float, float] = EQUAL_THIRDS
    objective_weights: tuple[float, float, float] = EQUAL_THIRDS

    def __post_init__(self):
        if not self.active or len(set(self.active)) != len(self.active) \
                or any(name not in OBJECTIVE_NAMES for name in self.active):
            raise ConfigError(f"must be a non-empty subset of {list(OBJECTIVE_NAMES)}", "objectives.active")
        if len(self.direction_weights) != 3 or len(self.objective_weights) != 3:
            raise ConfigError("weights need exactly three entries", "objectives")
        check_weights(self.direction_weights, "objectives.direction_weights")
        check_weights(self.objective_weights, "objectives.objective_weights")

    def active_indices(self) -> list[int]:
        return [OBJECTIVE_NAMES.index(name) for name in OBJECTIVE_NAMES if name in self.active]


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = SCENARIO_SCRATCH
    deployed_path: str | None = None

    def __post_init__(self):
        if self.kind not in (SCENARIO_SCRATCH, SCENARIO_AUGMENT):
            raise ConfigError(f"unknown scenario kind {self.kind!r}", "scenario.kind")


@dataclass(frozen=True)
class RunConfig:
    area: AreaConfig = field(default_factory=AreaConfig)
    candidates: CandidateConfig = field(default_factory=CandidateConfig)
    jammers: JammerConfig = field(default_factory=JammerConfig)
    requirements: ObjectiveRequirements = field(default_factory=ObjectiveRequirements)
    propagation: PropagationParams = field(default_factory=PropagationParams)
    objectives: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    output_dir: str = "out"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("top level must be a JSON object")
        _reject_unknown(cls, data, "")
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name not in data:
                continue
            if f.name == "output_dir":
                kwargs[f.name] = str(data[f.name])
            else:
                kwargs[f.name] = _section(_SECTION_TYPES[f.name], data[f.name], f.name)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        """First 16 hex digits of SHA-256 over the canonical JSON, output_dir excluded."""
        payload = self.to_dict()
        payload.pop("output_dir", None)
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, seed: int | None = None, output_dir: str | None = None,
                       deployed_path: str | None = None) -> "RunConfig":
        config = self
        if seed is not None:
            config = dataclasses.replace(config, ga=dataclasses.replace(config.ga, rng_seed=int(seed)))
        if output_dir is not None:
            config = dataclasses.replace(config, output_dir=output_dir)
        if deployed_path is not None:
            config = dataclasses.replace(config, scenario=ScenarioConfig(SCENARIO_AUGMENT, deployed_path))
        return config

    @classmethod
    def reproduction_preset(cls) -> "RunConfig":
        """
        Desk-scale reproduction setup: 400 lattice sites, 75 jammers, 30 sensors.

        Jammers use the LOS plus JSR rule; a jammer at 10000 m has a radio
        horizon of about 412 km and would otherwise reach every site in the area.
        """
        return cls(
            area=AreaConfig(),
            candidates=CandidateConfig(count=400, pattern=PATTERN_LATTICE),
            jammers=JammerConfig(count=75, heights_m=(3000.0, 6000.0, 10000.0), affect_rule=AFFECT_LOS_JSR),
            ga=GaConfig(population_size=100, generations=200, n_max=30),
        )


_SECTION_TYPES = {
    "area": AreaConfig,
    "candidates": CandidateConfig,
    "jammers": JammerConfig,
    "requirements": ObjectiveRequirements,
    "propagation": PropagationParams,
    "objectives": ObjectiveConfig,
    "ga": GaConfig,
    "scenario": ScenarioConfig,
}


def _reject_unknown(cls, data: dict, prefix: str) -> None:
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError("unknown key", f"{prefix}{key}")


def _section(cls, data, name: str):
    if not isinstance(data, dict):
        raise ConfigError("must be a JSON object", name)
    _reject_unknown(cls, data, f"{name}.")
    kwargs = {key: tuple(value) if isinstance(value, list) else value for key, value in data.items()}
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (InvalidInputError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), name) from exc
