"""
Diagnostics for a placement: k-coverage and GDOP per grid point, jammer
impact, and GDOP exceedance fractions.

Everything here is derived from PlacementEvaluator output, so reports use
exactly the values the fitness saw.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from Common.errors import InvalidInputError
from Data.config import ObjectiveConfig
from Evaluation.evaluate import PlacementEvaluator
from Objectives.fitness import ObjectiveScores
from Optimizer.chromosome import Chromosome
from Scenario.scenarioBuilder import PlacementProblem

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0)


@dataclass
class CoverageGrid:
    """Columns: lat_deg, lon_deg, alt_m, k, gdop, range2_km."""

    frame: pd.DataFrame

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def gdop(self) -> np.ndarray:
        return self.frame["gdop"].to_numpy(dtype=float)


@dataclass
class JamReport:
    """
    Per-jammer rows (id, position, affected, min_dist_km) plus aggregates.
    ``histogram`` maps an affected-sensor count to the number of jammers with it.
    """

    frame: pd.DataFrame
    max_affected: int
    mean_affected: float
    histogram: dict[int, int]


@dataclass
class GdopDistribution:
    """Fraction of points whose GDOP exceeds each threshold, pooled and per altitude."""

    thresholds: tuple[float, ...]
    pooled: dict[float, float]
    per_altitude: pd.DataFrame

    def fraction_above(self, threshold: float) -> float:
        return self.pooled[threshold]


def coverage_grid(problem: PlacementProblem, visible_count, achieved_gdop, achieved_range_km) -> CoverageGrid:
    points = problem.grid.points
    frame = pd.DataFrame({
        "lat_deg": points["lat_deg"].to_numpy(),
        "lon_deg": points["lon_deg"].to_numpy(),
        "alt_m": points["alt_m"].to_numpy(),
        "k": np.asarray(visible_count, dtype=int),
        "gdop": np.asarray(achieved_gdop, dtype=float),
        "range2_km": np.asarray(achieved_range_km, dtype=float),
    })
    return CoverageGrid(frame)


def jam_report(problem: PlacementProblem, affected, nearest_km) -> JamReport:
    frame = problem.jammer_table()
    frame["affected"] = np.asarray(affected, dtype=int)
    frame["min_dist_km"] = np.asarray(nearest_km, dtype=float)
    if len(frame):
        counts = frame["affected"].value_counts().sort_index()
        histogram = {int(k): int(v) for k, v in counts.items()}
        return JamReport(frame, int(frame["affected"].max()), float(frame["affected"].mean()), histogram)
    return JamReport(frame, 0, 0.0, {})


def evaluate_placement(problem: PlacementProblem, chromosome: Chromosome | np.ndarray,
                       objectives: ObjectiveConfig = ObjectiveConfig(),
                       evaluator: PlacementEvaluator | None = None) -> tuple[ObjectiveScores, CoverageGrid, JamReport]:
    """
    Raw scores plus coverage and jamming diagnostics for one selection.

    :param chromosome: A Chromosome or a boolean vector over the problem's sites.
    """
    genes = chromosome.genes if isinstance(chromosome, Chromosome) else np.asarray(chromosome, dtype=bool)
    if genes.shape != (problem.n_sites,):
        raise InvalidInputError(f"selection length {genes.size} does not match {problem.n_sites} sites")
    evaluator = evaluator or PlacementEvaluator(problem, objectives)
    detail = evaluator.evaluate_detail(genes)
    grid = coverage_grid(problem, detail.visible_count, detail.achieved_gdop, detail.achieved_range_km)
    report = jam_report(problem, detail.jammer_affected, detail.jammer_nearest_km)
    logger.info("placement of %d sensors: of1 %.6g, of2 %.6g, of3 %.6g, max jammer impact %d",
                detail.scores.n_sensors, detail.scores.of1, detail.scores.of2, detail.scores.of3,
                report.max_affected)
    return detail.scores, grid, report


def _exceedance(gdop: np.ndarray, thresholds) -> list[float]:
    if gdop.size == 0:
        return [0.0 for _ in thresholds]
    # inf exceeds every threshold
    return [float(np.mean(gdop > t)) for t in thresholds]


def gdop_distribution(grid: CoverageGrid, thresholds=DEFAULT_THRESHOLDS) -> GdopDistribution:
    thresholds = tuple(sorted(float(t) for t in thresholds))
    gdop = grid.gdop
    pooled = dict(zip(thresholds, _exceedance(gdop, thresholds)))

    rows = []
    for alt, part in grid.frame.groupby("alt_m", sort=True):
        fractions = _exceedance(part["gdop"].to_numpy(dtype=float), thresholds)
        rows.extend({"alt_m": alt, "threshold": t, "fraction_above": f} for t, f in zip(thresholds, fractions))
    per_altitude = pd.DataFrame(rows, columns=["alt_m", "threshold", "fraction_above"])
    return GdopDistribution(thresholds, pooled, per_altitude)
