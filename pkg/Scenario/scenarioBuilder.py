"""
Problem construction: airspace sampling, candidate sites, jammers, deployed
sensors and the geometry matrices every evaluation reads from.

Node tables are pandas DataFrames with columns ``lat_deg``, ``lon_deg`` and
``alt_m``. Grid points and generated sites are ordered by longitude, then
latitude (then altitude).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from Common.errors import ConfigError, InvalidInputError
from Data import config as cfg
from Data import dataLoader as dl
from Gdop.gdop import SubsetStrategy
from Geo import geodesy as geo
from Geo import propagation as prop
from Objectives.objectives import jsr_ratio
from Objectives.requirements import AFFECT_LOS_JSR, AffectRule, JammerModel, ObjectiveRequirements

logger = logging.getLogger(__name__)

SITE_COLUMNS = ["id", "lat_deg", "lon_deg", "alt_m", "forced"]
SITE_MATCH_TOLERANCE_DEG = 1e-6


@dataclass(frozen=True)
class AreaBounds:
    lat_low: float
    lat_up: float
    lon_low: float
    lon_up: float
    altitude_levels_m: tuple[float, ...] = (3000.0, 6000.0, 10000.0)

    def __post_init__(self):
        if not self.lat_low < self.lat_up:
            raise ConfigError("lat_low must be < lat_up", "area")
        if not self.lon_low < self.lon_up:
            raise ConfigError("lon_low must be < lon_up", "area")
        levels = tuple(self.altitude_levels_m)
        if any(h <= 0 for h in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ConfigError("altitude levels must be positive and strictly increasing", "area.altitude_levels_m")

    @classmethod
    def from_config(cls, area: cfg.AreaConfig) -> "AreaBounds":
        return cls(area.lat_low_deg, area.lat_up_deg, area.lon_low_deg, area.lon_up_deg,
                   tuple(area.altitude_levels_m))

    def contains(self, lat_deg, lon_deg) -> np.ndarray:
        lat = np.asarray(lat_deg, dtype=float)
        lon = np.asarray(lon_deg, dtype=float)
        return (lat >= self.lat_low) & (lat <= self.lat_up) & (lon >= self.lon_low) & (lon <= self.lon_up)

    def diagonal_km(self) -> float:
        return float(prop.ground_distance_km_matrix(self.lat_low, self.lon_low, self.lat_up, self.lon_up)[0, 0])


@dataclass
class AirspaceGrid:
    """Aircraft sample points with their per-point requirements."""

    points: pd.DataFrame

    def __len__(self) -> int:
        return len(self.points)

    @property
    def lat(self) -> np.ndarray:
        return self.points["lat_deg"].to_numpy(dtype=float)

    @property
    def lon(self) -> np.ndarray:
        return self.points["lon_deg"].to_numpy(dtype=float)

    @property
    def alt(self) -> np.ndarray:
        return self.points["alt_m"].to_numpy(dtype=float)

    @property
    def required_gdop(self) -> np.ndarray:
        return self.points["required_gdop"].to_numpy(dtype=float)

    @property
    def required_range_km(self) -> np.ndarray:
        return self.points["required_range_km"].to_numpy(dtype=float)


def _ordered(frame: pd.DataFrame) -> pd.DataFrame:
    order = np.lexsort((frame["alt_m"].to_numpy(), frame["lat_deg"].to_numpy(), frame["lon_deg"].to_numpy()))
    return frame.iloc[order].reset_index(drop=True)


def sample_grid(bounds: AreaBounds, lat_count: int, lon_count: int,
                requirements: ObjectiveRequirements = ObjectiveRequirements()) -> AirspaceGrid:
    """Regular lat x lon lattice spanning the bounds at every altitude level."""
    if lat_count < 2 or lon_count < 2:
        raise ConfigError("grid counts must be >= 2", "area.lat_count")
    lats = np.linspace(bounds.lat_low, bounds.lat_up, lat_count)
    lons = np.linspace(bounds.lon_low, bounds.lon_up, lon_count)
    alts = np.asarray(bounds.altitude_levels_m, dtype=float)
    lat_g, lon_g, alt_g = np.meshgrid(lats, lons, alts, indexing="ij")
    frame = pd.DataFrame({"lat_deg": lat_g.ravel(), "lon_deg": lon_g.ravel(), "alt_m": alt_g.ravel()})
    frame = _ordered(frame)
    frame["required_gdop"] = requirements.required_gdop
    frame["required_range_km"] = requirements.required_range_km
    return AirspaceGrid(frame)


def lattice_shape(count: int) -> tuple[int, int]:
    """Most square (rows, cols) factor pair of ``count``, rows <= cols."""
    rows = int(np.floor(np.sqrt(count)))
    while count % rows:
        rows -= 1
    return rows, count // rows


def _rectangle_centres(bounds: AreaBounds, count: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = lattice_shape(count)
    lat_step = (bounds.lat_up - bounds.lat_low) / rows
    lon_step = (bounds.lon_up - bounds.lon_low) / cols
    lats = bounds.lat_low + (np.arange(rows) + 0.5) * lat_step
    lons = bounds.lon_low + (np.arange(cols) + 0.5) * lon_step
    lat_g, lon_g = np.meshgrid(lats, lons, indexing="ij")
    return lat_g.ravel(), lon_g.ravel()


def generate_candidates(bounds: AreaBounds, count: int, pattern: str = cfg.PATTERN_LATTICE,
                        antenna_height_m: float = 0.0, seed: int = 0) -> pd.DataFrame:
    """
    Candidate ground sites.

    :param pattern: ``lattice`` puts one site at the centre of each of ``count``
        equal rectangles; ``uniform`` draws seeded uniform positions.
    """
    if count < 1:
        raise ConfigError("must be >= 1", "candidates.count")
    if pattern == cfg.PATTERN_LATTICE:
        lat, lon = _rectangle_centres(bounds, count)
    elif pattern == cfg.PATTERN_UNIFORM:
        rng = np.random.default_rng(seed)
        lat = rng.uniform(bounds.lat_low, bounds.lat_up, count)
        lon = rng.uniform(bounds.lon_low, bounds.lon_up, count)
    else:
        raise ConfigError(f"unknown pattern {pattern!r}", "candidates.pattern")

    frame = pd.DataFrame({"lat_deg": lat, "lon_deg": lon, "alt_m": float(antenna_height_m)})
    frame = _ordered(frame).drop_duplicates(subset=["lat_deg", "lon_deg"]).reset_index(drop=True)
    if len(frame) != count:
        raise InvalidInputError(f"generated {len(frame)} distinct sites instead of {count}")
    frame.insert(0, "id", [f"C{i:04d}" for i in range(len(frame))])
    frame["forced"] = False
    return frame


def generate_jammers(bounds: AreaBounds, count: int, heights_m, seed: int = 0,
                     pattern: str = cfg.PATTERN_GRID, template: JammerModel | None = None) -> list[JammerModel]:
    """
    Jammers spread over the area at the given heights.

    ``grid`` places ``count / len(heights_m)`` jammers per level on the
    rectangle-centre lattice; ``uniform`` draws seeded positions and cycles
    through the heights.
    """
    heights = [float(h) for h in heights_m]
    if count == 0:
        return []
    if pattern == cfg.PATTERN_GRID:
        if count % len(heights):
            raise ConfigError(f"{count} jammers do not split evenly over {len(heights)} heights", "jammers.count")
        lat, lon = _rectangle_centres(bounds, count // len(heights))
        rows = [(h, la, lo) for h in heights for la, lo in zip(lat, lon)]
    elif pattern == cfg.PATTERN_UNIFORM:
        rng = np.random.default_rng(seed)
        lat = rng.uniform(bounds.lat_low, bounds.lat_up, count)
        lon = rng.uniform(bounds.lon_low, bounds.lon_up, count)
        rows = [(heights[i % len(heights)], lat[i], lon[i]) for i in range(count)]
    else:
        raise ConfigError(f"unknown pattern {pattern!r}", "jammers.pattern")

    template = template or JammerModel(geo.GeodeticPosition(bounds.lat_low, bounds.lon_low, 0.0))
    jammers = []
    for h, la, lo in rows:
        position = geo.GeodeticPosition(float(la), float(lo), h)
        jammers.append(JammerModel(position, template.power_w, template.antenna_gain,
                                   template.transmitter_power_w, template.transmitter_gain, template.affect_rule))
    return jammers


def jammer_frame(jammers: list[JammerModel]) -> pd.DataFrame:
    return pd.DataFrame({
        "id": [f"J{i:03d}" for i in range(len(jammers))],
        "lat_deg": [j.position.latitude_deg for j in jammers],
        "lon_deg": [j.position.longitude_deg for j in jammers],
        "alt_m": [j.position.altitude_m for j in jammers],
    })


@dataclass
class PlacementProblem:
    """
    Everything an evaluation needs, read-only once built.

    Distances are kilometers. ``sites`` holds the candidates followed by the
    deployed sensors, whose ``forced`` flag is set. A deployed sensor standing
    on a candidate site takes that site over instead of adding a row.
    ``cell_count`` is the R of the knapsack penalty.
    """

    sites: pd.DataFrame
    jammers: list[JammerModel]
    grid: AirspaceGrid
    requirements: ObjectiveRequirements
    propagation: prop.PropagationParams
    dist_p: np.ndarray
    dc_p: np.ndarray
    los_p: np.ndarray
    dist_j: np.ndarray
    dc_j: np.ndarray
    los_j: np.ndarray
    affect_j: np.ndarray
    dist_s: np.ndarray
    range_cap_km: float
    subset_strategy: SubsetStrategy = field(default_factory=SubsetStrategy)
    cell_count: int | None = None

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def forced_mask(self) -> np.ndarray:
        return self.sites["forced"].to_numpy(dtype=bool)

    @property
    def forced_count(self) -> int:
        return int(self.forced_mask.sum())

    @property
    def candidate_count(self) -> int:
        return self.n_sites - self.forced_count

    @property
    def penalty_cells(self) -> int:
        return self.cell_count if self.cell_count else self.candidate_count

    def effective_n_max(self, n_new: int | None) -> int | None:
        """A budget of new sensors becomes a cap on the total including deployed ones."""
        return None if n_new is None else self.forced_count + n_new

    def jammer_table(self) -> pd.DataFrame:
        return jammer_frame(self.jammers)


def _affect_mask(jammers: list[JammerModel], dist_j_km: np.ndarray, los_j: np.ndarray) -> np.ndarray:
    affect = los_j.copy()
    for row, jammer in enumerate(jammers):
        rule = jammer.affect_rule
        if rule.kind != AFFECT_LOS_JSR:
            continue
        ratio = jsr_ratio(jammer.power_w, jammer.antenna_gain, jammer.transmitter_power_w,
                          jammer.transmitter_gain, rule.reference_range_km, dist_j_km[row])
        affect[row] &= ratio >= rule.jsr_threshold
    return affect


def precompute(grid: AirspaceGrid, sites: pd.DataFrame, jammers: list[JammerModel],
               requirements: ObjectiveRequirements, propagation: prop.PropagationParams,
               range_cap_km: float | None = None, cell_count: int | None = None) -> PlacementProblem:
    """Fill the distance, direction-cosine, LOS and jammer-affect matrices."""
    if len(grid) == 0:
        raise InvalidInputError("airspace grid is empty")
    site_lat = sites["lat_deg"].to_numpy(dtype=float)
    site_lon = sites["lon_deg"].to_numpy(dtype=float)
    site_alt = sites["alt_m"].to_numpy(dtype=float)
    site_ecef = geo.geodetic_to_ecef_array(site_lat, site_lon, site_alt).reshape(-1, 3)
    grid_ecef = geo.geodetic_to_ecef_array(grid.lat, grid.lon, grid.alt).reshape(-1, 3)

    dist_p = cdist(grid_ecef, site_ecef) / 1000.0
    dc_p = geo.direction_cosines_array(grid.lat, grid.lon, grid.alt, site_ecef)
    los_p = prop.visibility_matrix(grid.lat, grid.lon, grid.alt, site_lat, site_lon, site_alt, propagation)
    dist_s = cdist(site_ecef, site_ecef) / 1000.0

    if jammers:
        j_lat = np.array([j.position.latitude_deg for j in jammers])
        j_lon = np.array([j.position.longitude_deg for j in jammers])
        j_alt = np.array([j.position.altitude_m for j in jammers])
        jam_ecef = geo.geodetic_to_ecef_array(j_lat, j_lon, j_alt).reshape(-1, 3)
        dist_j = cdist(jam_ecef, site_ecef) / 1000.0
        dc_j = geo.direction_cosines_array(j_lat, j_lon, j_alt, site_ecef)
        los_j = prop.visibility_matrix(j_lat, j_lon, j_alt, site_lat, site_lon, site_alt, propagation)
    else:
        n = len(sites)
        dist_j = np.zeros((0, n))
        dc_j = np.zeros((0, n, 3))
        los_j = np.zeros((0, n), dtype=bool)
    affect_j = _affect_mask(jammers, dist_j, los_j)

    if range_cap_km is None:
        range_cap_km = requirements.range_cap_km
    if range_cap_km is None:
        range_cap_km = float(prop.ground_distance_km_array(grid.lat.min(), grid.lon.min(),
                                                            grid.lat.max(), grid.lon.max()))

    logger.info("precomputed %d grid points x %d sites, %d jammers", len(grid), len(sites), len(jammers))
    return PlacementProblem(
        sites=sites.reset_index(drop=True),
        jammers=list(jammers),
        grid=grid,
        requirements=requirements,
        propagation=propagation,
        dist_p=dist_p,
        dc_p=dc_p,
        los_p=los_p,
        dist_j=dist_j,
        dc_j=dc_j,
        los_j=los_j,
        affect_j=affect_j,
        dist_s=dist_s,
        range_cap_km=float(range_cap_km),
        subset_strategy=SubsetStrategy(requirements.gdop_subset_cap),
        cell_count=cell_count,
    )


def _jammer_template(jam: cfg.JammerConfig, bounds: AreaBounds) -> JammerModel:
    rule = AffectRule(jam.affect_rule, jam.jsr_threshold, jam.reference_range_km)
    return JammerModel(geo.GeodeticPosition(bounds.lat_low, bounds.lon_low, 0.0), jam.power_w,
                       jam.antenna_gain, jam.transmitter_power_w, jam.transmitter_gain, rule)


def _build(config: cfg.RunConfig, deployed: pd.DataFrame | None) -> PlacementProblem:
    bounds = AreaBounds.from_config(config.area)
    grid = sample_grid(bounds, config.area.lat_count, config.area.lon_count, config.requirements)
    candidates = generate_candidates(bounds, config.candidates.count, config.candidates.pattern,
                                     config.candidates.antenna_height_m, config.candidates.seed)
    jammers = generate_jammers(bounds, config.jammers.count, config.jammers.heights_m, config.jammers.seed,
                               config.jammers.pattern, _jammer_template(config.jammers, bounds))

    sites = candidates
    if deployed is not None and len(deployed):
        sites = merge_deployed(candidates, deployed)

    range_cap = config.requirements.range_cap_km or bounds.diagonal_km()
    return precompute(grid, sites, jammers, config.requirements, config.propagation, range_cap,
                      cell_count=config.candidates.count)


def merge_deployed(candidates: pd.DataFrame, deployed: pd.DataFrame,
                   tolerance_deg: float = SITE_MATCH_TOLERANCE_DEG) -> pd.DataFrame:
    """
    Site table with the deployed sensors forced.

    A deployed sensor within ``tolerance_deg`` of a candidate at the same
    altitude takes that candidate's row (keeping the deployed id); the rest
    are appended after the candidates.
    """
    sites = candidates.copy()
    lat = sites["lat_deg"].to_numpy(dtype=float)
    lon = sites["lon_deg"].to_numpy(dtype=float)
    alt = sites["alt_m"].to_numpy(dtype=float)

    appended = []
    for row in deployed.itertuples(index=False):
        free = ~sites["forced"].to_numpy(dtype=bool)
        hits = np.flatnonzero(free & (np.abs(lat - row.lat_deg) <= tolerance_deg)
                              & (np.abs(lon - row.lon_deg) <= tolerance_deg) & (np.abs(alt - row.alt_m) <= 1e-3))
        if hits.size:
            logger.info("deployed sensor %s stands on candidate %s", row.id, sites.at[hits[0], "id"])
            sites.loc[hits[0], ["id", "forced"]] = [str(row.id), True]
        else:
            appended.append({"id": str(row.id), "lat_deg": row.lat_deg, "lon_deg": row.lon_deg,
                             "alt_m": row.alt_m, "forced": True})
    if appended:
        sites = pd.concat([sites, pd.DataFrame(appended, columns=SITE_COLUMNS)], ignore_index=True)
    sites["forced"] = sites["forced"].astype(bool)
    return sites


def build_scenario1(config: cfg.RunConfig) -> PlacementProblem:
    """Greenfield placement: no deployed sensors."""
    problem = _build(config, None)
    logger.info("scenario 1: %d candidate sites", problem.n_sites)
    return problem


def build_scenario2(config: cfg.RunConfig, deployed_sensors: str | pd.DataFrame) -> PlacementProblem:
    """
    Augment an existing deployment; deployed sensors become forced sites.

    :param deployed_sensors: Path to an ``id,lat_deg,lon_deg,alt_m`` CSV or an already loaded frame.
    """
    bounds = AreaBounds.from_config(config.area)
    if isinstance(deployed_sensors, pd.DataFrame):
        deployed = deployed_sensors
    else:
        deployed = dl.loadSensorCsv(deployed_sensors, bounds=bounds)
    problem = _build(config, deployed)
    logger.info("scenario 2: %d candidate sites plus %d deployed", problem.candidate_count, problem.forced_count)
    return problem
