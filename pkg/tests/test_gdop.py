import itertools

import numpy as np
import pytest

from Common.errors import InvalidInputError
from Gdop import gdop as gd
from Geo import geodesy as geo


def _oracle_gdop(aircraft, sensors):
    rows = [np.append(geo.direction_cosines(aircraft, s), 1.0) for s in sensors]
    b = np.array(rows)
    return float(np.sqrt(np.trace(np.linalg.inv(b.T @ b))))


def _random_sensors(rng, count):
    ecef = geo.geodetic_to_ecef_array(rng.uniform(46, 50, count), rng.uniform(6, 10, count), rng.uniform(0, 500, count))
    return [geo.EcefPosition(*row) for row in ecef]


def _random_aircraft(rng):
    return geo.GeodeticPosition(float(rng.uniform(47, 49)), float(rng.uniform(7, 9)), float(rng.uniform(3000, 11000)))


def test_gdop_of_four_matches_generic_inversion():
    rng = np.random.default_rng(6)
    checked = 0
    while checked < 100:
        aircraft = _random_aircraft(rng)
        sensors = _random_sensors(rng, 4)
        b = np.array([np.append(geo.direction_cosines(aircraft, s), 1.0) for s in sensors])
        if np.linalg.cond(b) > 1e5:
            continue
        assert gd.gdop_of_four(aircraft, sensors) == pytest.approx(_oracle_gdop(aircraft, sensors), rel=1e-9)
        checked += 1


def test_gdop_of_four_needs_four_sensors():
    rng = np.random.default_rng(7)
    with pytest.raises(InvalidInputError):
        gd.gdop_of_four(_random_aircraft(rng), _random_sensors(rng, 3))


def test_repeated_direction_is_singular():
    cosines = np.array([[0.0, 0.0, 1.0]] * 4)
    assert np.isinf(gd.gdop_from_cosines(cosines))


def test_exhaustive_best_matches_full_enumeration():
    rng = np.random.default_rng(8)
    for n in range(4, 9):
        aircraft = _random_aircraft(rng)
        sensors = _random_sensors(rng, n)
        expected = min(gd.gdop_of_four(aircraft, list(combo)) for combo in itertools.combinations(sensors, 4))
        assert gd.best_gdop_at(aircraft, sensors, gd.EXHAUSTIVE) == pytest.approx(expected, rel=1e-9)


def test_capped_strategy_uses_the_nearest_sensors():
    rng = np.random.default_rng(9)
    aircraft = _random_aircraft(rng)
    sensors = _random_sensors(rng, 7)
    origin = geo.geodetic_to_ecef(aircraft)
    nearest = sorted(sensors, key=lambda s: geo.euclidean_distance(origin, s))[:5]
    expected = gd.best_gdop_at(aircraft, nearest, gd.EXHAUSTIVE)
    assert gd.best_gdop_at(aircraft, sensors, gd.SubsetStrategy(5)) == pytest.approx(expected, rel=1e-9)


def test_fewer_than_four_visible_is_infinite():
    rng = np.random.default_rng(10)
    assert np.isinf(gd.best_gdop_at(_random_aircraft(rng), _random_sensors(rng, 3)))
    assert np.isinf(gd.best_gdop_at(_random_aircraft(rng), []))


def test_more_sensors_never_worsen_exhaustive_gdop():
    rng = np.random.default_rng(11)
    aircraft = _random_aircraft(rng)
    sensors = _random_sensors(rng, 8)
    values = [gd.best_gdop_at(aircraft, sensors[:n], gd.EXHAUSTIVE) for n in range(4, 9)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(values, values[1:]))


def test_subset_cap_below_four_is_rejected():
    with pytest.raises(InvalidInputError):
        gd.SubsetStrategy(3)


def test_subset_indices_count():
    assert gd.subset_indices(12).shape == (495, 4)
    assert gd.subset_indices(4).tolist() == [[0, 1, 2, 3]]
