import numpy as np
import pytest

from Common.errors import DegenerateGeometryError, InvalidInputError
from Geo import geodesy as geo


def test_equator_prime_meridian_maps_to_semi_major_axis():
    e = geo.geodetic_to_ecef(geo.GeodeticPosition(0.0, 0.0, 0.0))
    assert e.x == pytest.approx(geo.WGS84_A)
    assert e.y == pytest.approx(0.0, abs=1e-9)
    assert e.z == pytest.approx(0.0, abs=1e-9)


def test_pole_maps_to_semi_minor_axis():
    e = geo.geodetic_to_ecef(geo.GeodeticPosition(90.0, 0.0, 0.0))
    assert e.z == pytest.approx(geo.WGS84_B, abs=1e-6)
    assert np.hypot(e.x, e.y) < 1e-6


def test_round_trip_random_points():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p = geo.GeodeticPosition(float(rng.uniform(-89.9, 89.9)), float(rng.uniform(-179.9, 179.9)),
                                 float(rng.uniform(-100.0, 20000.0)))
        back = geo.ecef_to_geodetic(geo.geodetic_to_ecef(p))
        assert back.latitude_deg == pytest.approx(p.latitude_deg, abs=1e-9)
        assert back.longitude_deg == pytest.approx(p.longitude_deg, abs=1e-9)
        assert back.altitude_m == pytest.approx(p.altitude_m, abs=1e-3)


def test_round_trip_at_the_pole_reports_zero_longitude():
    back = geo.ecef_to_geodetic(geo.geodetic_to_ecef(geo.GeodeticPosition(90.0, 0.0, 1200.0)))
    assert back.latitude_deg == pytest.approx(90.0, abs=1e-9)
    assert back.longitude_deg == 0.0
    assert back.altitude_m == pytest.approx(1200.0, abs=1e-3)


def test_earth_centre_is_degenerate():
    with pytest.raises(DegenerateGeometryError):
        geo.ecef_to_geodetic(geo.EcefPosition(0.0, 0.0, 0.0))


def test_latitude_out_of_range_is_rejected():
    with pytest.raises(InvalidInputError):
        geo.GeodeticPosition(91.0, 0.0)


def test_ned_rotation_is_orthonormal():
    rng = np.random.default_rng(2)
    for lat, lon in zip(rng.uniform(-90, 90, 200), rng.uniform(-180, 180, 200)):
        r = geo.ned_rotation(geo.GeodeticPosition(float(lat), float(lon)))
        assert np.max(np.abs(r @ r.T - np.eye(3))) < 1e-12
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)


def test_ned_rotation_on_the_equator_at_greenwich():
    r = geo.ned_rotation(geo.GeodeticPosition(0.0, 0.0))
    np.testing.assert_allclose(r, [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]], atol=1e-15)


def test_sensor_below_aircraft_points_down():
    aircraft = geo.GeodeticPosition(48.0, 8.0, 10000.0)
    sensor = geo.geodetic_to_ecef(geo.GeodeticPosition(48.0, 8.0, 0.0))
    cosines = geo.direction_cosines(aircraft, sensor)
    assert cosines == pytest.approx([0.0, 0.0, 1.0], abs=1e-9)
    assert geo.ned_vector(aircraft, sensor).norm() == pytest.approx(10000.0, abs=1e-6)


def test_sensor_to_the_north_has_positive_north_component():
    aircraft = geo.GeodeticPosition(48.0, 8.0, 0.0)
    sensor = geo.geodetic_to_ecef(geo.GeodeticPosition(48.1, 8.0, 0.0))
    v = geo.ned_vector(aircraft, sensor)
    assert v.north_m > 0
    assert abs(v.east_m) < 1e-6


def test_coincident_sensor_has_no_direction():
    aircraft = geo.GeodeticPosition(48.0, 8.0, 500.0)
    with pytest.raises(DegenerateGeometryError):
        geo.direction_cosines(aircraft, geo.geodetic_to_ecef(aircraft))


def test_direction_cosine_batch_matches_scalar_path():
    rng = np.random.default_rng(3)
    lat = rng.uniform(47, 49, 5)
    lon = rng.uniform(7, 9, 5)
    alt = rng.uniform(1000, 10000, 5)
    sensors = geo.geodetic_to_ecef_array(rng.uniform(47, 49, 6), rng.uniform(7, 9, 6), np.zeros(6))
    batch = geo.direction_cosines_array(lat, lon, alt, sensors)
    assert batch.shape == (5, 6, 3)
    for i in range(5):
        aircraft = geo.GeodeticPosition(float(lat[i]), float(lon[i]), float(alt[i]))
        for j in range(6):
            expected = geo.direction_cosines(aircraft, geo.EcefPosition(*sensors[j]))
            assert batch[i, j] == pytest.approx(expected, abs=1e-12)
    assert np.linalg.norm(batch, axis=-1) == pytest.approx(np.ones((5, 6)), abs=1e-12)


def test_euclidean_distance_is_symmetric():
    a = geo.geodetic_to_ecef(geo.GeodeticPosition(48.0, 8.0, 0.0))
    b = geo.geodetic_to_ecef(geo.GeodeticPosition(48.0, 8.0, 1000.0))
    assert geo.euclidean_distance(a, b) == pytest.approx(1000.0, abs=1e-6)
    assert geo.euclidean_distance(a, b) == geo.euclidean_distance(b, a)
