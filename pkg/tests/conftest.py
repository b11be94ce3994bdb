import json
import os
import sys

import pytest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from Data import config as cfg  # noqa: E402
from Objectives.requirements import ObjectiveRequirements  # noqa: E402
from Optimizer.nsga2 import GaConfig  # noqa: E402
from Scenario import scenarioBuilder as sb  # noqa: E402

FIXTURE_DIR = os.path.join(ROOT, "Data", "fixtures")
CLUSTERED21 = os.path.join(FIXTURE_DIR, "clustered21.csv")


def small_run_config(**ga_overrides) -> cfg.RunConfig:
    """24 grid points, 10 candidate sites, 2 jammers: small enough for exhaustive checks."""
    ga = dict(population_size=8, generations=4, n_max=6, rng_seed=7)
    ga.update(ga_overrides)
    return cfg.RunConfig(
        area=cfg.AreaConfig(lat_low_deg=47.4, lat_up_deg=48.4, lon_low_deg=7.0, lon_up_deg=8.2,
                            altitude_levels_m=(3000.0, 10000.0), lat_count=3, lon_count=4),
        candidates=cfg.CandidateConfig(count=10),
        jammers=cfg.JammerConfig(count=2, heights_m=(3000.0,)),
        requirements=ObjectiveRequirements(required_range_km=50.0, required_min_sensor_spacing_km=30.0,
                                           required_min_jammer_distance_km=30.0),
        ga=GaConfig(**ga),
    )


@pytest.fixture
def small_config():
    return small_run_config()


@pytest.fixture
def small_problem(small_config):
    return sb.build_scenario1(small_config)


def write_config(path, config: cfg.RunConfig) -> str:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(config.to_dict(), handle, indent=2)
    return str(path)


@pytest.fixture
def config_file(tmp_path, small_config):
    return write_config(tmp_path / "config.json", small_config)
