"""
GDOP for four receivers and the best achievable GDOP over a visible set.

For four receivers B is square, so tr((B^T B)^-1) equals the squared
Frobenius norm of B^-1. The batch path evaluates that through the 4x4
adjugate, elementwise over whole stacks of subsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from Common.errors import DegenerateGeometryError, InvalidInputError
from Geo import geodesy as geo

# Threshold on the condition number of B^T B, estimated as
# (||B||_F * ||B^-1||_F)^2.
SINGULAR_CONDITION = 1e12
DEFAULT_SUBSET_CAP = 12
_CHUNK_POINTS = 256


@dataclass(frozen=True)
class SubsetStrategy:
    """
    How the 4-subsets of a visible set are enumerated.

    ``max_sensors=None`` is exhaustive; otherwise only the nearest
    ``max_sensors`` visible receivers are enumerated.
    """

    max_sensors: int | None = DEFAULT_SUBSET_CAP

    def __post_init__(self):
        if self.max_sensors is not None and self.max_sensors < 4:
            raise InvalidInputError("subset cap must be >= 4")


EXHAUSTIVE = SubsetStrategy(None)


def gdop_matrix(cosines: np.ndarray) -> np.ndarray:
    """Rows [b1, b2, b3, 1] from an (..., 4, 3) stack of direction cosines."""
    cosines = np.asarray(cosines, dtype=float)
    ones = np.ones(cosines.shape[:-1] + (1,))
    return np.concatenate([cosines, ones], axis=-1)


def _adjugate_norms(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Determinant and squared Frobenius norm of the adjugate of (..., 4, 4)."""
    m00, m01, m02, m03 = m[..., 0, 0], m[..., 0, 1], m[..., 0, 2], m[..., 0, 3]
    m10, m11, m12, m13 = m[..., 1, 0], m[..., 1, 1], m[..., 1, 2], m[..., 1, 3]
    m20, m21, m22, m23 = m[..., 2, 0], m[..., 2, 1], m[..., 2, 2], m[..., 2, 3]
    m30, m31, m32, m33 = m[..., 3, 0], m[..., 3, 1], m[..., 3, 2], m[..., 3, 3]

    s0 = m00 * m11 - m10 * m01
    s1 = m00 * m12 - m10 * m02
    s2 = m00 * m13 - m10 * m03
    s3 = m01 * m12 - m11 * m02
    s4 = m01 * m13 - m11 * m03
    s5 = m02 * m13 - m12 * m03

    c5 = m22 * m33 - m32 * m23
    c4 = m21 * m33 - m31 * m23
    c3 = m21 * m32 - m31 * m22
    c2 = m20 * m33 - m30 * m23
    c1 = m20 * m32 - m30 * m22
    c0 = m20 * m31 - m30 * m21

    det = s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0

    adj = (
        m11 * c5 - m12 * c4 + m13 * c3,
        -m01 * c5 + m02 * c4 - m03 * c3,
        m31 * s5 - m32 * s4 + m33 * s3,
        -m21 * s5 + m22 * s4 - m23 * s3,
        -m10 * c5 + m12 * c2 - m13 * c1,
        m00 * c5 - m02 * c2 + m03 * c1,
        -m30 * s5 + m32 * s2 - m33 * s1,
        m20 * s5 - m22 * s2 + m23 * s1,
        m10 * c4 - m11 * c2 + m13 * c0,
        -m00 * c4 + m01 * c2 - m03 * c0,
        m30 * s4 - m31 * s2 + m33 * s0,
        -m20 * s4 + m21 * s2 - m23 * s0,
        -m10 * c3 + m11 * c1 - m12 * c0,
        m00 * c3 - m01 * c1 + m02 * c0,
        -m30 * s3 + m31 * s1 - m32 * s0,
        m20 * s3 - m21 * s1 + m22 * s0,
    )
    adj_sq = sum(a * a for a in adj)
    return det, adj_sq


def gdop_from_cosines(cosines: np.ndarray) -> np.ndarray:
    """
    GDOP for a stack of 4-receiver geometries.

    :param cosines: direction cosines, shape (..., 4, 3).
    :return: shape (...); ``inf`` where B^T B is singular or ill-conditioned.
    """
    b = gdop_matrix(cosines)
    det, adj_sq = _adjugate_norms(b)
    b_sq = np.sum(b * b, axis=(-2, -1))

    with np.errstate(divide="ignore", invalid="ignore"):
        inv_sq = adj_sq / (det * det)
        condition = b_sq * inv_sq
        value = np.sqrt(inv_sq)

    singular = (det == 0.0) | ~np.isfinite(condition) | (condition > SINGULAR_CONDITION)
    return np.where(singular, np.inf, value)


def gdop_of_four(aircraft: geo.GeodeticPosition, sensors: list[geo.EcefPosition]) -> float:
    if len(sensors) != 4:
        raise InvalidInputError(f"gdop_of_four needs exactly 4 sensors, got {len(sensors)}")
    cosines = np.stack([geo.direction_cosines(aircraft, s) for s in sensors])
    return float(gdop_from_cosines(cosines))


@lru_cache(maxsize=None)
def subset_indices(count: int) -> np.ndarray:
    """All 4-combinations of ``range(count)``, shape (C(count, 4), 4)."""
    return np.array(list(itertools.combinations(range(count), 4)), dtype=np.intp).reshape(-1, 4)


def min_gdop_over_subsets(cosines: np.ndarray) -> np.ndarray:
    """
    Minimum GDOP over every 4-subset of each point's receivers.

    :param cosines: shape (P, c, 3) with c >= 4 receivers per point.
    :return: shape (P,)
    """
    cosines = np.asarray(cosines, dtype=float)
    points, count = cosines.shape[0], cosines.shape[1]
    if count < 4:
        return np.full(points, np.inf)

    combos = subset_indices(count)
    best = np.empty(points)
    for start in range(0, points, _CHUNK_POINTS):
        block = cosines[start:start + _CHUNK_POINTS]
        stacked = block[:, combos, :]  # (p, K, 4, 3)
        best[start:start + _CHUNK_POINTS] = gdop_from_cosines(stacked).min(axis=1)
    return best


def best_gdop_at(aircraft: geo.GeodeticPosition, visible_sensors: list[geo.EcefPosition],
                 subset_strategy: SubsetStrategy = SubsetStrategy()) -> float:
    """Minimal GDOP over the 4-subsets of an already LOS-filtered sensor list."""
    if len(visible_sensors) < 4:
        return float("inf")

    sensors = np.stack([s.as_array() for s in visible_sensors])
    origin = geo.geodetic_to_ecef(aircraft).as_array()
    ranges = np.linalg.norm(sensors - origin, axis=1)
    if np.any(ranges == 0.0):
        raise DegenerateGeometryError("a visible sensor coincides with the aircraft point")

    cap = subset_strategy.max_sensors
    if cap is not None and len(sensors) > cap:
        sensors = sensors[np.argsort(ranges, kind="stable")[:cap]]

    cosines = geo.direction_cosines_array(aircraft.latitude_deg, aircraft.longitude_deg,
                                          aircraft.altitude_m, sensors)
    return float(min_gdop_over_subsets(cosines)[0])
