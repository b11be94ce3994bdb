import dataclasses
import logging

import numpy as np
import pandas as pd
import pytest

from Common.errors import ConfigError, InputFileError
from Data import config as cfg
from Data import dataLoader as dl
from Geo import geodesy as geo
from Geo import propagation as prop
from Optimizer import chromosome as chromo
from Scenario import scenarioBuilder as sb
from conftest import CLUSTERED21, small_run_config


def _clustered_config():
    config = small_run_config()
    return dataclasses.replace(config, area=dataclasses.replace(config.area, lon_up_deg=8.8))


def test_two_by_two_grid_sits_on_the_corners():
    bounds = sb.AreaBounds(47.0, 48.0, 7.0, 8.0, (3000.0,))
    grid = sb.sample_grid(bounds, 2, 2)
    assert list(zip(grid.lat, grid.lon)) == [(47.0, 7.0), (48.0, 7.0), (47.0, 8.0), (48.0, 8.0)]
    assert np.all(grid.alt == 3000.0)


def test_grid_is_ordered_by_longitude_then_latitude_then_altitude():
    grid = sb.sample_grid(sb.AreaBounds(47.0, 48.0, 7.0, 8.0, (3000.0, 6000.0)), 3, 3)
    keys = list(zip(grid.lon, grid.lat, grid.alt))
    assert keys == sorted(keys)
    assert len(grid) == 18
    assert np.all(grid.required_gdop == 10.0)


def test_bad_area_is_a_config_error():
    with pytest.raises(ConfigError):
        sb.AreaBounds(48.0, 47.0, 7.0, 8.0)
    with pytest.raises(ConfigError):
        sb.AreaBounds(47.0, 48.0, 7.0, 8.0, (6000.0, 3000.0))


def test_lattice_shape():
    assert sb.lattice_shape(400) == (20, 20)
    assert sb.lattice_shape(25) == (5, 5)
    assert sb.lattice_shape(10) == (2, 5)
    assert sb.lattice_shape(7) == (1, 7)


def test_lattice_candidates_are_distinct_and_inside():
    bounds = sb.AreaBounds.from_config(cfg.AreaConfig())
    sites = sb.generate_candidates(bounds, 400)
    assert len(sites) == 400
    assert not sites.duplicated(subset=["lat_deg", "lon_deg"]).any()
    assert bounds.contains(sites["lat_deg"], sites["lon_deg"]).all()
    assert sites["id"].iloc[0] == "C0000" and not sites["forced"].any()


def test_uniform_candidates_follow_the_seed():
    bounds = sb.AreaBounds(47.0, 48.0, 7.0, 8.0)
    a = sb.generate_candidates(bounds, 50, cfg.PATTERN_UNIFORM, seed=3)
    b = sb.generate_candidates(bounds, 50, cfg.PATTERN_UNIFORM, seed=3)
    c = sb.generate_candidates(bounds, 50, cfg.PATTERN_UNIFORM, seed=4)
    assert a.equals(b)
    assert not a.equals(c)
    with pytest.raises(ConfigError):
        sb.generate_candidates(bounds, 50, "spiral")


def test_jammers_split_evenly_over_heights():
    bounds = sb.AreaBounds.from_config(cfg.AreaConfig())
    jammers = sb.generate_jammers(bounds, 75, (3000.0, 6000.0, 10000.0))
    assert len(jammers) == 75
    heights = [j.position.altitude_m for j in jammers]
    assert {h: heights.count(h) for h in set(heights)} == {3000.0: 25, 6000.0: 25, 10000.0: 25}
    assert sb.jammer_frame(jammers)["id"].iloc[-1] == "J074"
    with pytest.raises(ConfigError):
        sb.generate_jammers(bounds, 10, (3000.0, 6000.0, 10000.0))
    with pytest.raises(ConfigError):
        cfg.JammerConfig(count=10)
    assert sb.generate_jammers(bounds, 0, (3000.0,)) == []


def test_precomputed_geometry(small_problem):
    p = small_problem
    assert p.dist_p.shape == (24, 10)
    assert p.dc_p.shape == (24, 10, 3)
    assert np.allclose(p.dist_s, p.dist_s.T)
    assert np.all(np.diag(p.dist_s) == 0.0)
    assert np.allclose(np.linalg.norm(p.dc_p, axis=-1), 1.0)

    sites = p.sites
    for i, j in [(0, 0), (5, 3), (23, 9)]:
        aircraft = geo.GeodeticPosition(p.grid.lat[i], p.grid.lon[i], p.grid.alt[i])
        site = geo.GeodeticPosition(sites["lat_deg"][j], sites["lon_deg"][j], sites["alt_m"][j])
        expected = geo.euclidean_distance(geo.geodetic_to_ecef(aircraft), geo.geodetic_to_ecef(site)) / 1000.0
        assert p.dist_p[i, j] == pytest.approx(expected, rel=1e-12)
        assert p.los_p[i, j] == prop.is_visible(aircraft, site, p.propagation)


def test_range_cap_defaults_to_the_area_diagonal(small_problem, small_config):
    bounds = sb.AreaBounds.from_config(small_config.area)
    assert small_problem.range_cap_km == pytest.approx(bounds.diagonal_km())


def test_scenario1_has_no_forced_sites(small_problem):
    assert small_problem.forced_count == 0
    assert small_problem.candidate_count == 10
    assert small_problem.effective_n_max(6) == 6
    assert small_problem.effective_n_max(None) is None
    assert len(small_problem.jammer_table()) == 2


def test_scenario2_forces_the_deployed_sensors():
    problem = sb.build_scenario2(_clustered_config(), CLUSTERED21)
    assert problem.n_sites == 31
    assert problem.forced_count == 21
    assert problem.forced_mask[10:].all() and not problem.forced_mask[:10].any()
    assert problem.effective_n_max(15) == 36
    assert problem.sites["id"].iloc[10] == "D01"


def test_fixture_plus_fifteen_new_sensors():
    problem = sb.build_scenario2(cfg.RunConfig.reproduction_preset(), CLUSTERED21)
    assert problem.n_sites == 400 + 21
    assert problem.candidate_count == 400
    n_max = problem.effective_n_max(15)
    assert n_max == 36

    forced = problem.forced_mask
    rng = np.random.default_rng(15)
    population = chromo.init_population(20, forced, n_max, rng)
    for a, b in zip(population[::2], population[1::2]):
        for child in chromo.crossover(a, b, 1.0, rng):
            child = chromo.mutate(child, 0.05, rng, n_max)
            assert np.all(child.genes[forced])
            assert 21 <= child.popcount <= 36

    repaired = chromo.repair(np.ones(problem.n_sites, dtype=bool), forced, n_max, rng)
    assert repaired.sum() == 36
    assert np.all(repaired[forced])


def test_deployed_sensor_on_a_candidate_takes_the_site_over(small_config):
    candidates = sb.generate_candidates(sb.AreaBounds.from_config(small_config.area), 10)
    site = candidates.iloc[3]
    deployed = pd.DataFrame({"id": ["D1", "D2"], "lat_deg": [site["lat_deg"], 47.5],
                             "lon_deg": [site["lon_deg"], 7.1], "alt_m": [0.0, 0.0]})
    problem = sb.build_scenario2(small_config, deployed)
    assert problem.n_sites == 11
    assert problem.forced_count == 2
    assert problem.sites["id"].iloc[3] == "D1" and problem.forced_mask[3]
    assert problem.sites["id"].iloc[10] == "D2"
    assert not problem.sites.duplicated(subset=["lat_deg", "lon_deg", "alt_m"]).any()
    assert problem.penalty_cells == 10


def test_empty_deployed_file_matches_scenario1(tmp_path, small_config, small_problem):
    empty = tmp_path / "deployed.csv"
    empty.write_text("")
    problem = sb.build_scenario2(small_config, str(empty))
    assert problem.forced_count == 0
    assert problem.sites.equals(small_problem.sites)
    assert np.array_equal(problem.dist_p, small_problem.dist_p)


def test_header_only_deployed_file_loads_no_sensors(tmp_path):
    path = tmp_path / "deployed.csv"
    path.write_text("id,lat_deg,lon_deg,alt_m\n")
    assert len(dl.loadSensorCsv(str(path))) == 0


def test_duplicates_and_outside_rows_are_reported(tmp_path, caplog):
    path = tmp_path / "deployed.csv"
    path.write_text("id,lat_deg,lon_deg,alt_m\n"
                    "A,47.5,7.5,0\n"
                    "B,47.5,7.5,0\n"
                    "C,52.0,7.5,0\n")
    bounds = sb.AreaBounds(47.0, 48.0, 7.0, 8.0)
    with caplog.at_level(logging.WARNING):
        frame = dl.loadSensorCsv(str(path), bounds=bounds)
    assert list(frame["id"]) == ["A", "C"]
    assert "duplicated" in caplog.text
    assert "sensor C lies outside" in caplog.text


def test_clustered_fixture_outside_small_area_is_kept(small_config, caplog):
    with caplog.at_level(logging.WARNING):
        problem = sb.build_scenario2(small_config, CLUSTERED21)
    assert problem.forced_count == 21
    assert "outside the area bounds" in caplog.text


def test_malformed_row_reports_its_line(tmp_path):
    path = tmp_path / "deployed.csv"
    path.write_text("id,lat_deg,lon_deg,alt_m\n"
                    "A,47.5,7.5,0\n"
                    "B,north,7.6,0\n")
    with pytest.raises(InputFileError) as info:
        dl.loadSensorCsv(str(path))
    assert info.value.line == 3
    assert ":3:" in str(info.value)


def test_missing_column_is_an_input_error(tmp_path):
    path = tmp_path / "deployed.csv"
    path.write_text("id,lat_deg,lon_deg\nA,47.5,7.5\n")
    with pytest.raises(InputFileError):
        dl.loadSensorCsv(str(path))
    with pytest.raises(FileNotFoundError):
        dl.loadSensorCsv(str(tmp_path / "absent.csv"))


def test_reproduction_preset_values():
    preset = cfg.RunConfig.reproduction_preset()
    assert preset.candidates.count == 400
    assert preset.jammers.count == 75
    assert preset.area.altitude_levels_m == (3000.0, 6000.0, 10000.0)
    assert (preset.area.lat_low_deg, preset.area.lat_up_deg) == (47.4, 51.4)
    assert (preset.area.lon_low_deg, preset.area.lon_up_deg) == (5.71, 9.71)
    assert preset.ga.n_max == 30
    assert preset.jammers.affect_rule == cfg.AFFECT_LOS_JSR
