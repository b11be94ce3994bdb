"""
The three security objectives as mean squared deviations.

Every objective is minimized and only counts the side of the deviation
that misses the requirement: a GDOP or range worse than required, spacing
or jammer distance short of the target, more sensors in a jammer's range
than allowed. Achieved values that cannot be evaluated (fewer than four
or two receivers) arrive as ``inf`` and are clamped at the configured cap.
"""

from __future__ import annotations

import numpy as np

from Common.errors import ConfigError, InvalidInputError
from Geo import geodesy as geo
from Objectives.requirements import JammerModel

WEIGHT_SUM_TOLERANCE = 1e-9


def _as_points(achieved, required, label: str) -> tuple[np.ndarray, np.ndarray]:
    achieved = np.atleast_1d(np.asarray(achieved, dtype=float))
    required = np.broadcast_to(np.asarray(required, dtype=float), achieved.shape)
    if achieved.size == 0:
        raise InvalidInputError(f"{label}: airspace grid is empty")
    return achieved, required


def capped_shortfall(achieved, required, cap: float) -> np.ndarray:
    """max(0, min(achieved, cap) - required) elementwise."""
    achieved = np.minimum(np.asarray(achieved, dtype=float), cap)
    return np.maximum(0.0, achieved - np.asarray(required, dtype=float))


def of1_gdop_msd(achieved_gdop, required_gdop, gdop_cap: float = 100.0) -> float:
    achieved, required = _as_points(achieved_gdop, required_gdop, "of1")
    deviation = capped_shortfall(achieved, required, gdop_cap)
    return float(np.mean(deviation ** 2))


def of2_range_msd(achieved_range_km, required_range_km, range_cap_km: float) -> float:
    achieved, required = _as_points(achieved_range_km, required_range_km, "of2")
    deviation = capped_shortfall(achieved, required, range_cap_km)
    return float(np.mean(deviation ** 2))


def nearest_neighbour_km(pairwise_km: np.ndarray) -> np.ndarray:
    pairwise = np.array(pairwise_km, dtype=float)
    np.fill_diagonal(pairwise, np.inf)
    return pairwise.min(axis=1)


def of3_direction1_spacing(pairwise_km: np.ndarray, target_km: float) -> float:
    """
    Shortfall of each sensor's nearest-neighbour distance below the target.

    :param pairwise_km: (n, n) distances between the selected sensors.
    """
    pairwise_km = np.asarray(pairwise_km, dtype=float)
    if pairwise_km.ndim != 2 or pairwise_km.shape[0] != pairwise_km.shape[1]:
        raise InvalidInputError("pairwise distances must be a square matrix")
    if pairwise_km.shape[0] < 2:
        raise InvalidInputError("spacing needs at least 2 sensors")
    shortfall = np.minimum(0.0, nearest_neighbour_km(pairwise_km) - target_km)
    return float(np.mean(shortfall ** 2))


def _check_jammer_matrix(matrix: np.ndarray, label: str) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise InvalidInputError(f"{label}: need at least one jammer and one sensor")
    return matrix


def jammer_nearest_km(jammer_dist_km: np.ndarray, in_los: np.ndarray) -> np.ndarray:
    """Distance from each jammer to its nearest sensor in LOS; inf when none is."""
    masked = np.where(np.asarray(in_los, dtype=bool), np.asarray(jammer_dist_km, dtype=float), np.inf)
    return masked.min(axis=1)


def of3_direction2_jammer_distance(jammer_dist_km: np.ndarray, in_los: np.ndarray, target_km: float) -> float:
    """
    Per jammer, the shortfall of the nearest in-LOS sensor below the target.
    Jammers that see no sensor contribute 0.
    """
    jammer_dist_km = _check_jammer_matrix(jammer_dist_km, "direction2")
    in_los = _check_jammer_matrix(in_los, "direction2")
    nearest = jammer_nearest_km(jammer_dist_km, in_los)
    shortfall = np.minimum(0.0, np.minimum(nearest, target_km) - target_km)
    return float(np.mean(shortfall ** 2))


def of3_direction3_sensors_in_range(affected: np.ndarray, max_allowed: int = 0) -> float:
    """Mean squared excess of affected sensors per jammer over ``max_allowed``."""
    affected = _check_jammer_matrix(affected, "direction3")
    counts = np.asarray(affected, dtype=bool).sum(axis=1)
    excess = np.maximum(0, counts - max_allowed).astype(float)
    return float(np.mean(excess ** 2))


def jsr_ratio(jammer_power_w, jammer_gain, transmitter_power_w, transmitter_gain,
              transmitter_distance, jammer_distance):
    """Jamming-to-signal ratio, ``inf`` where the jammer sits on the sensor."""
    numerator = np.asarray(jammer_power_w, dtype=float) * jammer_gain * np.square(transmitter_distance)
    denominator = np.asarray(transmitter_power_w, dtype=float) * transmitter_gain * np.square(jammer_distance)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = numerator / denominator
    return np.where(np.asarray(denominator) == 0.0, np.inf, ratio)


def jsr(jammer: JammerModel, sensor: geo.GeodeticPosition, transmitter_point: geo.GeodeticPosition) -> float:
    sensor_ecef = geo.geodetic_to_ecef(sensor)
    dist_ts = geo.euclidean_distance(geo.geodetic_to_ecef(transmitter_point), sensor_ecef)
    dist_js = geo.euclidean_distance(geo.geodetic_to_ecef(jammer.position), sensor_ecef)
    return float(jsr_ratio(jammer.power_w, jammer.antenna_gain, jammer.transmitter_power_w,
                           jammer.transmitter_gain, dist_ts, dist_js))


def check_weights(weights, label: str = "weights") -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise ConfigError("must be non-negative", label)
    if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise ConfigError(f"must sum to 1, got {weights.sum():.12g}", label)
    return weights


def of3_combined(d1: float, d2: float, d3: float, weights=(1 / 3, 1 / 3, 1 / 3)) -> float:
    """Weighted sum of the normalized direction scores."""
    w = check_weights(weights, "direction weights")
    return float(w[0] * d1 + w[1] * d2 + w[2] * d3)
