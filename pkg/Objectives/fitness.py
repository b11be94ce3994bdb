"""
Knapsack penalty, penalty-weighted fitness and score normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from Common.errors import ConfigError, InvalidInputError

OBJECTIVE_NAMES = ("of1", "of2", "of3")


def knapsack_penalty(selected_count: int, total_cells: int) -> float:
    """c(S) = 1/2 * (selected / R)^2, in [0, 0.5]."""
    if total_cells <= 0:
        raise ConfigError("total cell count R must be > 0", "total_cells")
    if not 0 <= selected_count <= total_cells:
        raise InvalidInputError(f"selected count {selected_count} outside [0, {total_cells}]")
    return 0.5 * (selected_count / total_cells) ** 2


def weighted_fitness(objective_score: float, penalty: float, pareto_weight_a: float) -> float:
    if not 0.0 <= pareto_weight_a <= 1.0:
        raise InvalidInputError("pareto weight a must lie in [0, 1]")
    return (1.0 - pareto_weight_a) * objective_score + pareto_weight_a * penalty


def normalize_score(score: float, running_min: float, running_max: float) -> float:
    if running_max < running_min:
        raise InvalidInputError("running_max must be >= running_min")
    if running_max == running_min:
        return 0.0
    value = (score - running_min) / (running_max - running_min)
    return float(min(1.0, max(0.0, value)))


@dataclass
class NormalizationBounds:
    """
    Running per-objective min/max over every individual evaluated in a run.

    Workers keep their own copy and the coordinator merges them; once a run
    finishes the bounds are frozen.
    """

    minimum: dict[str, float] = field(default_factory=lambda: {k: np.inf for k in OBJECTIVE_NAMES})
    maximum: dict[str, float] = field(default_factory=lambda: {k: -np.inf for k in OBJECTIVE_NAMES})
    frozen: bool = False

    def update(self, raw: dict[str, float]) -> None:
        if self.frozen:
            return
        for name in OBJECTIVE_NAMES:
            value = raw[name]
            self.minimum[name] = min(self.minimum[name], value)
            self.maximum[name] = max(self.maximum[name], value)

    def merge(self, other: "NormalizationBounds") -> None:
        if self.frozen:
            return
        for name in OBJECTIVE_NAMES:
            self.minimum[name] = min(self.minimum[name], other.minimum[name])
            self.maximum[name] = max(self.maximum[name], other.maximum[name])

    def freeze(self) -> "NormalizationBounds":
        self.frozen = True
        return self

    def normalize(self, raw: dict[str, float]) -> dict[str, float]:
        out = {}
        for name in OBJECTIVE_NAMES:
            lo, hi = self.minimum[name], self.maximum[name]
            if not np.isfinite(lo) or not np.isfinite(hi):
                out[name] = 0.0
            else:
                out[name] = normalize_score(raw[name], lo, hi)
        return out

    def to_dict(self) -> dict:
        return {"min": dict(self.minimum), "max": dict(self.maximum)}

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationBounds":
        bounds = cls(minimum={k: float(v) for k, v in data["min"].items()},
                     maximum={k: float(v) for k, v in data["max"].items()})
        return bounds.freeze()


@dataclass
class ObjectiveScores:
    """
    Raw and derived scores for one placement.

    ``of3`` is the weighted sum of the direction scores after each was
    scaled by its saturation ceiling; ``of3_components`` keeps the raw
    direction MSDs.
    """

    of1: float
    of2: float
    of3: float
    of3_components: tuple[float, float, float]
    penalty: float
    n_sensors: int
    normalized: dict[str, float] = field(default_factory=dict)
    accepted: dict[str, bool] = field(default_factory=dict)

    def raw(self) -> dict[str, float]:
        return {"of1": self.of1, "of2": self.of2, "of3": self.of3}

    def as_record(self) -> dict:
        record = {
            "n_sensors": self.n_sensors,
            "of1": self.of1,
            "of2": self.of2,
            "of3": self.of3,
            "of3_direction1": self.of3_components[0],
            "of3_direction2": self.of3_components[1],
            "of3_direction3": self.of3_components[2],
            "penalty": self.penalty,
        }
        for name in OBJECTIVE_NAMES:
            if name in self.normalized:
                record[f"{name}_norm"] = self.normalized[name]
        for name, ok in self.accepted.items():
            record[f"{name}_ok"] = bool(ok)
        return record
