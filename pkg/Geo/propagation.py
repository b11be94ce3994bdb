"""
Air-to-ground radio line of sight under the effective-earth-radius model,
plus the time-of-arrival model used for MLAT feasibility.

Distances in the LOS inequality are great-circle ground distances in km
and heights are in meters, which is the unit system the 0.0785 constant
(~ 1 / 3.57^2) belongs to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from Common.errors import InvalidInputError
from Geo import geodesy as geo

SPEED_OF_LIGHT_M_S = 299792458.0
MEAN_EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class PropagationParams:
    effective_earth_radius_factor: float = 4.0 / 3.0
    horizon_coefficient: float = 3.57  # km / sqrt(m)
    los_coefficient: float = 0.0785  # m / km^2

    def __post_init__(self):
        if not self.effective_earth_radius_factor > 0:
            raise InvalidInputError("effective_earth_radius_factor must be > 0")
        if self.horizon_coefficient <= 0 or self.los_coefficient <= 0:
            raise InvalidInputError("horizon and LOS coefficients must be > 0")


def radio_horizon_km(h1_m: float, h2_m: float, params: PropagationParams = PropagationParams()) -> float:
    if h1_m < 0 or h2_m < 0:
        raise InvalidInputError("antenna heights must be >= 0")
    k = params.effective_earth_radius_factor
    return params.horizon_coefficient * np.sqrt(k) * (np.sqrt(h1_m) + np.sqrt(h2_m))


def los_required_altitude_m(distance_km, params: PropagationParams = PropagationParams()):
    """Lowest transmitter altitude that still sees a ground receiver at this range."""
    return params.los_coefficient * (distance_km * distance_km) / params.effective_earth_radius_factor


def ground_distance_km_array(lat1_deg, lon1_deg, lat2_deg, lon2_deg) -> np.ndarray:
    """Haversine distance on the mean-radius sphere; inputs broadcast."""
    lat1 = np.radians(np.asarray(lat1_deg, dtype=float))
    lat2 = np.radians(np.asarray(lat2_deg, dtype=float))
    dlat = lat2 - lat1
    dlon = np.radians(np.asarray(lon2_deg, dtype=float) - np.asarray(lon1_deg, dtype=float))
    a = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    return 2.0 * MEAN_EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def ground_distance_km_matrix(tx_lat, tx_lon, rx_lat, rx_lon) -> np.ndarray:
    """Pairwise ground distances, rows are transmitters and columns receivers."""
    tx_lat = np.atleast_1d(np.asarray(tx_lat, dtype=float))
    tx_lon = np.atleast_1d(np.asarray(tx_lon, dtype=float))
    rx_lat = np.atleast_1d(np.asarray(rx_lat, dtype=float))
    rx_lon = np.atleast_1d(np.asarray(rx_lon, dtype=float))
    return ground_distance_km_array(tx_lat[:, None], tx_lon[:, None], rx_lat[None, :], rx_lon[None, :])


def ground_distance_km(a: geo.GeodeticPosition, b: geo.GeodeticPosition) -> float:
    return float(ground_distance_km_matrix(a.latitude_deg, a.longitude_deg, b.latitude_deg, b.longitude_deg)[0, 0])


def visibility_matrix(tx_lat, tx_lon, tx_alt, rx_lat, rx_lon, rx_alt,
                      params: PropagationParams = PropagationParams()) -> np.ndarray:
    """
    LOS mask between every transmitter (rows) and receiver (columns).

    Receivers at height 0 use the inequality h1 >= c * d^2 / k_e; raised
    receivers use d <= r0(h1, h2). 0.0785 is slightly above 1 / 3.57^2, so the
    ground test is marginally stricter than the horizon test as h2 -> 0: raising
    a receiver never hides a transmitter it could see from the ground.
    """
    tx_alt = np.atleast_1d(np.asarray(tx_alt, dtype=float))
    rx_alt = np.atleast_1d(np.asarray(rx_alt, dtype=float))

    d = ground_distance_km_matrix(tx_lat, tx_lon, rx_lat, rx_lon)
    h1 = np.broadcast_to(tx_alt[:, None], d.shape)
    h2 = np.broadcast_to(rx_alt[None, :], d.shape)
    k = params.effective_earth_radius_factor

    flat_receiver = h1 >= los_required_altitude_m(d, params)

    horizon = params.horizon_coefficient * np.sqrt(k) * (np.sqrt(np.maximum(h1, 0.0)) + np.sqrt(np.maximum(h2, 0.0)))
    raised_receiver = d <= horizon

    return np.where(h2 > 0.0, raised_receiver, flat_receiver)


def is_visible(transmitter: geo.GeodeticPosition, receiver: geo.GeodeticPosition,
               params: PropagationParams = PropagationParams()) -> bool:
    mask = visibility_matrix(transmitter.latitude_deg, transmitter.longitude_deg, transmitter.altitude_m,
                             receiver.latitude_deg, receiver.longitude_deg, receiver.altitude_m, params)
    return bool(mask[0, 0])


def toa(transmitter: geo.GeodeticPosition, sensor: geo.GeodeticPosition, tau_s: float = 0.0,
        noise_std_s: float = 0.0, rng_seed: int | np.random.Generator | None = None) -> float:
    """
    Time of arrival of a broadcast at a sensor: range / c + tau + e.

    :param rng_seed: Seed or caller-owned Generator for the Gaussian noise term.
    """
    if noise_std_s < 0:
        raise InvalidInputError("noise_std_s must be >= 0")
    distance = geo.euclidean_distance(geo.geodetic_to_ecef(transmitter), geo.geodetic_to_ecef(sensor))
    t = distance / SPEED_OF_LIGHT_M_S + tau_s
    if noise_std_s > 0:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
        t += float(rng.normal(0.0, noise_std_s))
    return float(t)
