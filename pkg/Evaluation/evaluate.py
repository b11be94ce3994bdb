"""
Scores a site selection against a PlacementProblem.

This is the only place objective scores are computed: the optimizer, the
evaluate command and the coverage reports all go through
PlacementEvaluator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from Common.errors import InvalidInputError
from Data.config import ObjectiveConfig
from Gdop.gdop import min_gdop_over_subsets
from Objectives import objectives as of
from Objectives.fitness import OBJECTIVE_NAMES, ObjectiveScores, knapsack_penalty, weighted_fitness
from Optimizer.nsga2 import MODE_WEIGHTED
from Scenario import scenarioBuilder as sb

logger = logging.getLogger(__name__)


@dataclass
class PlacementDetail:
    """Per-point and per-jammer quantities behind one set of scores."""

    selected: np.ndarray
    visible_count: np.ndarray
    achieved_gdop: np.ndarray
    achieved_range_km: np.ndarray
    nearest_neighbour_km: np.ndarray
    jammer_nearest_km: np.ndarray
    jammer_affected: np.ndarray
    scores: ObjectiveScores


class PlacementEvaluator:
    """
    Evaluates gene vectors for one problem.

    :param problem: The precomputed scenario.
    :param objectives: Active objectives and weights.
    :param n_max: Largest total sensor count a selection can reach; bounds the
        direction 3 ceiling. None means every site may be selected.
    """

    def __init__(self, problem: sb.PlacementProblem, objectives: ObjectiveConfig = ObjectiveConfig(),
                 n_max: int | None = None):
        self.problem = problem
        self.objectives = objectives
        self.n_max = problem.n_sites if n_max is None else min(int(n_max), problem.n_sites)
        self.forced_mask = problem.forced_mask
        self.ceilings = self._saturation_ceilings()

    def _saturation_ceilings(self) -> dict[str, float]:
        p = self.problem
        req = p.requirements
        grid = p.grid

        def ceiling(value: float) -> float:
            return value if value > 0 else 1.0

        of1_worst = np.max(np.maximum(0.0, req.gdop_cap - grid.required_gdop)) ** 2
        of2_worst = np.max(np.maximum(0.0, p.range_cap_km - grid.required_range_km)) ** 2
        excess = max(self.n_max - req.required_max_sensors_in_jammer_los, 0)
        return {
            "of1": ceiling(float(of1_worst)),
            "of2": ceiling(float(of2_worst)),
            "direction1": ceiling(req.required_min_sensor_spacing_km ** 2),
            "direction2": ceiling(req.required_min_jammer_distance_km ** 2),
            "direction3": ceiling(float(excess) ** 2),
        }

    def _genes(self, genes) -> np.ndarray:
        genes = np.asarray(genes, dtype=bool)
        if genes.shape != (self.problem.n_sites,):
            raise InvalidInputError(f"chromosome length {genes.size} does not match {self.problem.n_sites} sites")
        return genes | self.forced_mask

    def _coverage(self, selected: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        p = self.problem
        m = len(p.grid)
        gdop = np.full(m, np.inf)
        range2 = np.full(m, np.inf)
        if selected.size == 0:
            return np.zeros(m, dtype=int), gdop, range2

        los = p.los_p[:, selected]
        counts = los.sum(axis=1)
        dist = np.where(los, p.dist_p[:, selected], np.inf)
        order = np.argsort(dist, axis=1, kind="stable")
        if selected.size >= 2:
            range2 = np.take_along_axis(dist, order[:, 1:2], axis=1)[:, 0]

        cap = p.subset_strategy.max_sensors
        used = counts if cap is None else np.minimum(counts, cap)
        for count in np.unique(used[used >= 4]):
            rows = np.flatnonzero(used == count)
            nearest = selected[order[rows, :count]]
            cosines = p.dc_p[rows[:, None], nearest]
            gdop[rows] = min_gdop_over_subsets(cosines)
        return counts, gdop, range2

    def evaluate_detail(self, genes) -> PlacementDetail:
        genes = self._genes(genes)
        p = self.problem
        req = p.requirements
        selected = np.flatnonzero(genes)
        n = selected.size

        counts, gdop, range2 = self._coverage(selected)
        of1 = of.of1_gdop_msd(gdop, p.grid.required_gdop, req.gdop_cap)
        of2 = of.of2_range_msd(range2, p.grid.required_range_km, p.range_cap_km)

        spacing_target = req.required_min_sensor_spacing_km
        if n >= 2:
            pairwise = p.dist_s[np.ix_(selected, selected)]
            nn = of.nearest_neighbour_km(pairwise)
            d1 = of.of3_direction1_spacing(pairwise, spacing_target)
        else:
            nn = np.full(n, np.inf)
            d1 = spacing_target ** 2

        k = len(p.jammers)
        if k and n:
            dist_j = p.dist_j[:, selected]
            los_j = p.los_j[:, selected]
            affect = p.affect_j[:, selected]
            jam_nearest = of.jammer_nearest_km(dist_j, los_j)
            jam_affected = affect.sum(axis=1)
            d2 = of.of3_direction2_jammer_distance(dist_j, los_j, req.required_min_jammer_distance_km)
            d3 = of.of3_direction3_sensors_in_range(affect, req.required_max_sensors_in_jammer_los)
        else:
            jam_nearest = np.full(k, np.inf)
            jam_affected = np.zeros(k, dtype=int)
            # an empty selection saturates direction 2 the way n < 2 saturates direction 1
            d2 = req.required_min_jammer_distance_km ** 2 if k else 0.0
            d3 = 0.0

        c = self.ceilings
        of3 = of.of3_combined(d1 / c["direction1"], d2 / c["direction2"], d3 / c["direction3"],
                              self.objectives.direction_weights)
        scores = ObjectiveScores(
            of1=of1,
            of2=of2,
            of3=of3,
            of3_components=(float(d1), float(d2), float(d3)),
            penalty=knapsack_penalty(int(np.count_nonzero(genes & ~self.forced_mask)), p.penalty_cells),
            n_sensors=int(n),
        )
        detail = PlacementDetail(selected, counts, gdop, range2, nn, jam_nearest, jam_affected, scores)
        scores.accepted = self.acceptance(detail)
        return detail

    def evaluate_genes(self, genes) -> ObjectiveScores:
        return self.evaluate_detail(genes).scores

    def acceptance(self, detail: PlacementDetail) -> dict[str, bool]:
        """Sup-norm tolerance checks on the same deviations the MSDs average."""
        p = self.problem
        req = p.requirements
        gdop_dev = of.capped_shortfall(detail.achieved_gdop, p.grid.required_gdop, req.gdop_cap)
        range_dev = of.capped_shortfall(detail.achieved_range_km, p.grid.required_range_km, p.range_cap_km)

        spacing_ok = detail.selected.size >= 2 and bool(
            np.all(np.maximum(0.0, req.required_min_sensor_spacing_km - detail.nearest_neighbour_km)
                   < req.spacing_tolerance_km))
        jam_short = np.maximum(0.0, req.required_min_jammer_distance_km
                               - np.minimum(detail.jammer_nearest_km, req.required_min_jammer_distance_km))
        jam_excess = np.maximum(0, detail.jammer_affected - req.required_max_sensors_in_jammer_los)
        jammer_ok = bool(np.all(jam_short < req.jammer_distance_tolerance_km)
                         and np.all(jam_excess <= req.jammer_los_tolerance))
        return {
            "of1": bool(np.max(gdop_dev) < req.gdop_tolerance),
            "of2": bool(np.max(range_dev) < req.range_tolerance_km),
            "of3": bool(spacing_ok and jammer_ok),
        }

    def scaled(self, scores: ObjectiveScores) -> dict[str, float]:
        """Raw scores divided by their saturation ceilings, each in [0, 1]."""
        c = self.ceilings
        return {
            "of1": min(scores.of1 / c["of1"], 1.0),
            "of2": min(scores.of2 / c["of2"], 1.0),
            "of3": min(scores.of3, 1.0),
        }

    def dominance_labels(self, mode: str) -> tuple[str, ...]:
        """Names of the dominance vector entries, in order."""
        if mode == MODE_WEIGHTED:
            return ("weighted",)
        return tuple(name for name in OBJECTIVE_NAMES if name in self.objectives.active)

    def dominance_vector(self, scores: ObjectiveScores, pareto_weight_a: float, mode: str) -> np.ndarray:
        scaled = self.scaled(scores)
        active = [name for name in OBJECTIVE_NAMES if name in self.objectives.active]
        blended = np.array([weighted_fitness(scaled[name], scores.penalty, pareto_weight_a) for name in active])
        if mode == MODE_WEIGHTED:
            weights = np.array([self.objectives.objective_weights[OBJECTIVE_NAMES.index(name)] for name in active])
            total = weights.sum()
            value = float(blended @ weights / total) if total > 0 else float(blended.mean())
            return np.array([value])
        return blended

    @staticmethod
    def runEvaluation(problem: sb.PlacementProblem, genes,
                      objectives: ObjectiveConfig = ObjectiveConfig()) -> pd.DataFrame:
        """
        One-row results table for a single selection.

        :param problem: The precomputed scenario.
        :param genes: Boolean selection over the problem's sites.
        """
        scores = PlacementEvaluator(problem, objectives).evaluate_genes(genes)
        return pd.DataFrame([scores.as_record()])


def placementFromSensors(problem: sb.PlacementProblem, sensors: pd.DataFrame,
                         tolerance_deg: float = sb.SITE_MATCH_TOLERANCE_DEG) -> tuple[sb.PlacementProblem, np.ndarray]:
    """
    Map a sensor table onto the problem's sites.

    Rows within ``tolerance_deg`` of a site (same altitude) select it; rows
    matching no site are appended as forced sites and the geometry is
    recomputed.

    :return: The (possibly extended) problem and its selection vector.
    """
    sites = problem.sites
    site_lat = sites["lat_deg"].to_numpy(dtype=float)
    site_lon = sites["lon_deg"].to_numpy(dtype=float)
    site_alt = sites["alt_m"].to_numpy(dtype=float)

    genes = np.zeros(len(sites), dtype=bool)
    unmatched = []
    for row in sensors.itertuples(index=False):
        close = (np.abs(site_lat - row.lat_deg) <= tolerance_deg) & (np.abs(site_lon - row.lon_deg) <= tolerance_deg) \
            & (np.abs(site_alt - row.alt_m) <= 1e-3)
        hits = np.flatnonzero(close)
        if hits.size:
            genes[hits[0]] = True
        else:
            unmatched.append({"id": str(row.id), "lat_deg": row.lat_deg, "lon_deg": row.lon_deg,
                              "alt_m": row.alt_m, "forced": True})

    if unmatched:
        logger.warning("%d sensor rows match no site; adding them as forced sites", len(unmatched))
        extended = pd.concat([sites, pd.DataFrame(unmatched, columns=sb.SITE_COLUMNS)], ignore_index=True)
        problem = sb.precompute(problem.grid, extended, problem.jammers, problem.requirements,
                                problem.propagation, problem.range_cap_km, problem.cell_count)
        genes = np.concatenate([genes, np.ones(len(unmatched), dtype=bool)])
    return problem, genes
