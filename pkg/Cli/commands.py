"""
The optimize, augment, evaluate and report commands.

Each command takes paths and overrides, writes its result files into the
output directory and returns what it computed so callers and tests can
inspect it without re-reading files.
"""

from __future__ import annotations

import dataclasses
import glob
import json
import logging
import os
import sys

import pandas as pd

from Analysis import coverage as cov
from Common.errors import ConfigError
from Data import config as cfg
from Data import dataLoader as dl
from Evaluation.evaluate import PlacementEvaluator, placementFromSensors
from Objectives.fitness import NormalizationBounds
from Optimizer import nsga2
from Ranking import ranking as rk
from Scenario import scenarioBuilder as sb

logger = logging.getLogger(__name__)

PARETO_FILE = "pareto.csv"
HISTORY_FILE = "history.csv"
RUN_FILE = "run.json"
SCORES_FILE = "scores.json"
COVERAGE_FILE = "coverage.csv"
JAM_REPORT_FILE = "jam_report.csv"
SOLUTION_PATTERN = "solution_{}.csv"


def _load(config_path: str, seed: int | None, out: str | None, deployed_path: str | None = None) -> cfg.RunConfig:
    config = dl.loadConfig(config_path)
    return config.with_overrides(seed=seed, output_dir=out, deployed_path=deployed_path)


def _build_problem(config: cfg.RunConfig) -> sb.PlacementProblem:
    if config.scenario.kind == cfg.SCENARIO_AUGMENT:
        if not config.scenario.deployed_path:
            raise ConfigError("augment scenario needs a deployed sensor file", "scenario.deployed_path")
        return sb.build_scenario2(config, config.scenario.deployed_path)
    return sb.build_scenario1(config)


def _tag(frame: pd.DataFrame, config_hash: str, seed: int) -> pd.DataFrame:
    frame = frame.copy()
    frame["config_hash"] = config_hash
    frame["seed"] = seed
    return frame


def _progress_writer(stream):
    def write(record: dict) -> None:
        stream.write(json.dumps(record) + "\n")
        stream.flush()
    return write


def solution_frame(problem: sb.PlacementProblem, member: nsga2.Individual, solution_id: int,
                   config_hash: str, seed: int) -> pd.DataFrame:
    """Sensor rows of one front member, in site order."""
    sites = problem.sites.iloc[member.chromosome.selected_indices()]
    frame = sites[["id", "lat_deg", "lon_deg", "alt_m", "forced"]].reset_index(drop=True)
    frame.insert(0, "solution_id", solution_id)
    return _tag(frame, config_hash, seed)


def write_front(problem: sb.PlacementProblem, front: nsga2.ParetoFront, config: cfg.RunConfig) -> pd.DataFrame:
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    summary = rk.pareto_summary(front)
    rk.convertDfToCsv(summary, os.path.join(out, PARETO_FILE))
    for solution_id, member in enumerate(front.members):
        frame = solution_frame(problem, member, solution_id, front.config_hash, front.seed)
        rk.convertDfToCsv(frame, os.path.join(out, SOLUTION_PATTERN.format(solution_id)))

    history = pd.DataFrame([{"generation": h["gen"], "front_size": h["front_size"],
                             **{f"best_{i}": b for i, b in enumerate(h["best"])}} for h in front.history])
    rk.convertDfToCsv(_tag(history, front.config_hash, front.seed), os.path.join(out, HISTORY_FILE))

    dl.writeJson({
        "config_hash": front.config_hash,
        "seed": front.seed,
        "normalization_bounds": front.bounds.to_dict(),
        "generations_run": front.generations_run,
        "front_size": len(front),
        "n_sites": problem.n_sites,
        "n_deployed": problem.forced_count,
        "n_grid_points": len(problem.grid),
        "n_jammers": len(problem.jammers),
        "deployed_path": config.scenario.deployed_path,
        "config": config.to_dict(),
    }, os.path.join(out, RUN_FILE))
    return summary


def _run_optimizer(config: cfg.RunConfig, threads: int | None, progress) -> nsga2.ParetoFront:
    problem = _build_problem(config)
    ga = dataclasses.replace(config.ga, n_max=problem.effective_n_max(config.ga.n_max))
    evaluator = PlacementEvaluator(problem, config.objectives, ga.n_max)
    workers = threads if threads else (os.cpu_count() or 1)
    front = nsga2.evolve(evaluator, ga, _progress_writer(progress) if progress else None,
                         workers=workers, config_hash=config.config_hash())
    write_front(problem, front, config)
    return front


def cmd_optimize(config_path: str, out: str | None = None, seed: int | None = None,
                 threads: int | None = None, progress=None) -> nsga2.ParetoFront:
    """
    Scenario 1 (or the scenario named in the config): optimize and write the front files.

    :param progress: Text stream receiving one JSON line per generation; None keeps quiet.
    """
    config = _load(config_path, seed, out)
    logger.info("optimize: config %s, seed %d, output %s", config.config_hash(), config.ga.rng_seed,
                config.output_dir)
    return _run_optimizer(config, threads, progress)


def cmd_augment(config_path: str, deployed_csv: str, out: str | None = None, seed: int | None = None,
                threads: int | None = None, progress=None) -> nsga2.ParetoFront:
    """Scenario 2: the deployed sensors are forced into every solution."""
    config = _load(config_path, seed, out, deployed_path=deployed_csv)
    logger.info("augment: config %s, deployed %s, seed %d", config.config_hash(), deployed_csv, config.ga.rng_seed)
    return _run_optimizer(config, threads, progress)


def _sibling_run(sensors_csv: str) -> dict | None:
    return dl.loadRunJson(os.path.join(os.path.dirname(os.path.abspath(sensors_csv)), RUN_FILE))


def cmd_evaluate(config_path: str, sensors_csv: str, out: str | None = None, seed: int | None = None) -> dict:
    """
    Score a sensor list and write scores.json, coverage.csv and jam_report.csv.

    When the sensor file sits next to a run.json, that run's deployed sites and
    frozen normalization bounds are used so a solution file reproduces its
    pareto.csv row. The run's config hash and seed label the results unless
    ``seed`` overrides the seed.
    """
    run = _sibling_run(sensors_csv)
    deployed = None
    if run and run.get("deployed_path") and os.path.exists(run["deployed_path"]):
        deployed = run["deployed_path"]
    config = _load(config_path, seed, out, deployed_path=deployed)

    problem = _build_problem(config)
    n_max = problem.effective_n_max(config.ga.n_max)
    sensors = dl.loadSensorCsv(sensors_csv)
    problem, genes = placementFromSensors(problem, sensors)
    if n_max is not None:
        n_max = max(n_max, int(genes.sum()))
    evaluator = PlacementEvaluator(problem, config.objectives, n_max)
    scores, grid, jam = cov.evaluate_placement(problem, genes, evaluator=evaluator)

    if run and "normalization_bounds" in run:
        bounds = NormalizationBounds.from_dict(run["normalization_bounds"])
        scores.normalized = bounds.normalize(scores.raw())

    config_hash = run.get("config_hash", config.config_hash()) if run else config.config_hash()
    seed_value = config.ga.rng_seed
    if run and seed is None and "seed" in run:
        seed_value = int(run["seed"])
    distribution = cov.gdop_distribution(grid)
    result = scores.as_record()
    result.update({
        "config_hash": config_hash,
        "seed": seed_value,
        "sensors_file": os.path.basename(sensors_csv),
        "gdop_fraction_above": {f"{t:g}": f for t, f in distribution.pooled.items()},
        "jammer_max_affected": jam.max_affected,
        "jammer_mean_affected": jam.mean_affected,
    })

    os.makedirs(config.output_dir, exist_ok=True)
    dl.writeJson(result, os.path.join(config.output_dir, SCORES_FILE))
    rk.convertDfToCsv(_tag(grid.frame, config_hash, seed_value), os.path.join(config.output_dir, COVERAGE_FILE))
    jam_frame = jam.frame.rename(columns={"min_dist_km": "min_dist"})
    rk.convertDfToCsv(_tag(jam_frame, config_hash, seed_value), os.path.join(config.output_dir, JAM_REPORT_FILE))
    return result


def cmd_report(front_dir: str, budget: int | None = None, weights=(1 / 3, 1 / 3, 1 / 3), stream=None) -> int:
    """Print the Pareto summary and the member picked for the given budget and weights."""
    stream = stream or sys.stdout
    summary = rk.readCsvToDf(os.path.join(front_dir, PARETO_FILE))
    solution_files = glob.glob(os.path.join(front_dir, SOLUTION_PATTERN.format("*")))
    if len(solution_files) != len(summary):
        logger.warning("%s lists %d members but %d solution files exist", PARETO_FILE, len(summary),
                       len(solution_files))

    columns = [c for c in ("id", "n_sensors", "of1", "of2", "of3", "of1_norm", "of2_norm", "of3_norm", "penalty")
               if c in summary.columns] + rk.dominance_columns(summary)
    stream.write(summary[columns].to_string(index=False) + "\n")
    chosen = rk.select_solution(summary, budget, weights)
    stream.write(f"selected solution {chosen}: {SOLUTION_PATTERN.format(chosen)}\n")
    return chosen
