from __future__ import annotations

from dataclasses import dataclass

from Common.errors import InvalidInputError
from Geo import geodesy as geo

AFFECT_LOS = "los"
AFFECT_LOS_JSR = "los_jsr"


@dataclass(frozen=True)
class ObjectiveRequirements:
    """
    Required values and acceptance tolerances for the three objectives.

    Per-point GDOP and range requirements live on the AirspaceGrid; the
    scalars here are the defaults the grid is filled with.
    """

    required_gdop: float = 10.0
    required_range_km: float = 150.0
    required_min_sensor_spacing_km: float = 80.0
    required_min_jammer_distance_km: float = 80.0
    required_max_sensors_in_jammer_los: int = 0

    gdop_cap: float = 100.0
    range_cap_km: float | None = None  # None -> area diagonal
    gdop_subset_cap: int | None = 12

    gdop_tolerance: float = 5.0
    range_tolerance_km: float = 50.0
    spacing_tolerance_km: float = 20.0
    jammer_distance_tolerance_km: float = 20.0
    jammer_los_tolerance: int = 2

    def __post_init__(self):
        positives = {
            "required_gdop": self.required_gdop,
            "required_range_km": self.required_range_km,
            "required_min_sensor_spacing_km": self.required_min_sensor_spacing_km,
            "required_min_jammer_distance_km": self.required_min_jammer_distance_km,
            "gdop_cap": self.gdop_cap,
            "gdop_tolerance": self.gdop_tolerance,
            "range_tolerance_km": self.range_tolerance_km,
            "spacing_tolerance_km": self.spacing_tolerance_km,
            "jammer_distance_tolerance_km": self.jammer_distance_tolerance_km,
        }
        for name, value in positives.items():
            if not (value > 0 and value != float("inf")):
                raise InvalidInputError(f"{name} must be finite and > 0, got {value}")
        if self.range_cap_km is not None and not self.range_cap_km > 0:
            raise InvalidInputError("range_cap_km must be > 0")
        if self.required_max_sensors_in_jammer_los < 0 or self.jammer_los_tolerance < 0:
            raise InvalidInputError("jammer LOS counts must be >= 0")
        if self.gdop_subset_cap is not None and self.gdop_subset_cap < 4:
            raise InvalidInputError("gdop_subset_cap must be >= 4")


@dataclass(frozen=True)
class AffectRule:
    """
    When a jammer counts as affecting a sensor.

    ``los``: the sensor is inside the jammer's radio horizon.
    ``los_jsr``: additionally JSR >= ``jsr_threshold``, with the legitimate
    transmitter assumed ``reference_range_km`` away from the sensor.
    """

    kind: str = AFFECT_LOS
    jsr_threshold: float = 1.0
    reference_range_km: float = 150.0

    def __post_init__(self):
        if self.kind not in (AFFECT_LOS, AFFECT_LOS_JSR):
            raise InvalidInputError(f"unknown affect rule {self.kind!r}")
        if self.jsr_threshold <= 0 or self.reference_range_km <= 0:
            raise InvalidInputError("jsr_threshold and reference_range_km must be > 0")


@dataclass(frozen=True)
class JammerModel:
    position: geo.GeodeticPosition
    power_w: float = 10.0
    antenna_gain: float = 1.0
    transmitter_power_w: float = 250.0
    transmitter_gain: float = 1.0
    affect_rule: AffectRule = AffectRule()

    def __post_init__(self):
        for name in ("power_w", "antenna_gain", "transmitter_power_w", "transmitter_gain"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"jammer {name} must be > 0")
