"""
Coordinate frames used by the GDOP math: WGS-84 geodetic <-> ECEF, the
local North-East-Down rotation at an aircraft point and the direction
cosines from an aircraft to a sensor.

Scalar helpers work on the small frozen position types; the ``*_array``
variants take numpy arrays and are what the scenario precomputation uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from Common.errors import DegenerateGeometryError, InvalidInputError

# WGS-84 ellipsoid
WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
WGS84_B = WGS84_A * (1.0 - WGS84_F)

_MAX_ITERATIONS = 12
_LAT_EPS_RAD = 1e-14
_POLE_AXIS_EPS_M = 1e-9


@dataclass(frozen=True)
class GeodeticPosition:
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise InvalidInputError(f"latitude {self.latitude_deg} outside [-90, 90]")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise InvalidInputError(f"longitude {self.longitude_deg} outside [-180, 180]")


@dataclass(frozen=True)
class EcefPosition:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class NedVector:
    north_m: float
    east_m: float
    down_m: float

    def as_array(self) -> np.ndarray:
        return np.array([self.north_m, self.east_m, self.down_m], dtype=float)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def geodetic_to_ecef_array(lat_deg, lon_deg, alt_m) -> np.ndarray:
    """Vectorised WGS-84 conversion, returns an (..., 3) array in meters."""
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    alt = np.asarray(alt_m, dtype=float)

    sin_lat = np.sin(lat)
    cos_lat = np.cos(lat)
    n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)

    x = (n + alt) * cos_lat * np.cos(lon)
    y = (n + alt) * cos_lat * np.sin(lon)
    z = (n * (1.0 - WGS84_E2) + alt) * sin_lat
    return np.stack([x, y, z], axis=-1)


def geodetic_to_ecef(p: GeodeticPosition) -> EcefPosition:
    x, y, z = geodetic_to_ecef_array(p.latitude_deg, p.longitude_deg, p.altitude_m)
    return EcefPosition(float(x), float(y), float(z))


def ecef_to_geodetic(e: EcefPosition) -> GeodeticPosition:
    """
    Inverse WGS-84 conversion by fixed-point iteration on latitude.

    Longitude is reported as 0 on the polar axis.
    """
    x, y, z = e.x, e.y, e.z
    p = float(np.hypot(x, y))
    if p == 0.0 and z == 0.0:
        raise DegenerateGeometryError("ECEF position at the Earth centre has no geodetic equivalent")

    lon = 0.0 if p < _POLE_AXIS_EPS_M else float(np.arctan2(y, x))

    lat = float(np.arctan2(z, p * (1.0 - WGS84_E2)))
    alt = 0.0
    for _ in range(_MAX_ITERATIONS):
        sin_lat = np.sin(lat)
        n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        # stable at the poles, unlike p / cos(lat) - N
        alt = p * np.cos(lat) + z * sin_lat - WGS84_A * np.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        new_lat = float(np.arctan2(z, p * (1.0 - WGS84_E2 * n / (n + alt))))
        if abs(new_lat - lat) < _LAT_EPS_RAD:
            lat = new_lat
            break
        lat = new_lat

    sin_lat = np.sin(lat)
    alt = p * np.cos(lat) + z * sin_lat - WGS84_A * np.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)

    lat_deg = min(90.0, max(-90.0, float(np.degrees(lat))))
    return GeodeticPosition(lat_deg, float(np.degrees(lon)), float(alt))


def ned_rotation_array(lat_deg, lon_deg) -> np.ndarray:
    """Stack of NED rotation matrices, shape (..., 3, 3)."""
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    sp, cp = np.sin(lat), np.cos(lat)
    sl, cl = np.sin(lon), np.cos(lon)
    zero = np.zeros_like(sp)

    rows = [
        [-sp * cl, -sp * sl, cp],
        [-sl, cl, zero],
        [-cp * cl, -cp * sl, -sp],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def ned_rotation(p: GeodeticPosition) -> np.ndarray:
    """Rotation R taking an ECEF displacement to the NED frame at ``p``."""
    return ned_rotation_array(p.latitude_deg, p.longitude_deg)


def ned_vector(aircraft: GeodeticPosition, sensor: EcefPosition) -> NedVector:
    origin = geodetic_to_ecef(aircraft).as_array()
    v = ned_rotation(aircraft) @ (sensor.as_array() - origin)
    return NedVector(float(v[0]), float(v[1]), float(v[2]))


def direction_cosines_array(lat_deg, lon_deg, alt_m, sensors_ecef: np.ndarray) -> np.ndarray:
    """
    Unit NED vectors from each aircraft point to every sensor.

    :param lat_deg, lon_deg, alt_m: aircraft points, shape (m,).
    :param sensors_ecef: sensor ECEF coordinates, shape (n, 3).
    :return: array of shape (m, n, 3). Rows for coincident pairs are NaN.
    """
    lat = np.atleast_1d(np.asarray(lat_deg, dtype=float))
    lon = np.atleast_1d(np.asarray(lon_deg, dtype=float))
    alt = np.atleast_1d(np.asarray(alt_m, dtype=float))
    sensors = np.atleast_2d(np.asarray(sensors_ecef, dtype=float))

    origins = geodetic_to_ecef_array(lat, lon, alt)
    rotations = ned_rotation_array(lat, lon)
    displacement = sensors[np.newaxis, :, :] - origins[:, np.newaxis, :]
    v = np.einsum("mij,mnj->mni", rotations, displacement)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosines = v / norms
    cosines[np.broadcast_to(norms == 0.0, cosines.shape)] = np.nan
    return cosines


def direction_cosines(aircraft: GeodeticPosition, sensor: EcefPosition) -> np.ndarray:
    v = ned_vector(aircraft, sensor).as_array()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DegenerateGeometryError("sensor coincides with the aircraft point")
    return v / norm


def euclidean_distance(a: EcefPosition, b: EcefPosition) -> float:
    """Straight-line distance in meters."""
    return float(np.linalg.norm(a.as_array() - b.as_array()))
