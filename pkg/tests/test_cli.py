import filecmp
import glob
import io
import json
import os

import numpy as np
import pandas as pd
import pytest

import main
from Cli import commands
from Optimizer.nsga2 import dominates
from Ranking import ranking as rk
from conftest import CLUSTERED21, write_config


def _optimize(config_file, out, threads=1, seed=None):
    progress = io.StringIO()
    front = commands.cmd_optimize(config_file, out=str(out), seed=seed, threads=threads, progress=progress)
    return front, progress.getvalue()


def _solution_files(out):
    return sorted(glob.glob(os.path.join(str(out), "solution_*.csv")))


def _same_files(a, b):
    names = sorted(os.path.basename(p) for p in glob.glob(os.path.join(str(a), "*.csv")))
    assert names == sorted(os.path.basename(p) for p in glob.glob(os.path.join(str(b), "*.csv")))
    for name in names:
        assert filecmp.cmp(os.path.join(str(a), name), os.path.join(str(b), name), shallow=False), name


def test_optimize_writes_the_front(tmp_path, config_file):
    out = tmp_path / "run"
    front, _ = _optimize(config_file, out)
    pareto = pd.read_csv(out / commands.PARETO_FILE)
    assert len(pareto) == len(front)
    assert len(_solution_files(out)) == len(front)
    assert (out / commands.HISTORY_FILE).exists()

    run = json.loads((out / commands.RUN_FILE).read_text())
    assert run["front_size"] == len(front)
    assert run["seed"] == 7
    assert set(pareto["config_hash"]) == {run["config_hash"]}
    assert set(run["normalization_bounds"]) == {"min", "max"}


def test_solutions_respect_the_sensor_cap(tmp_path, config_file):
    out = tmp_path / "run"
    _optimize(config_file, out)
    for path in _solution_files(out):
        solution = pd.read_csv(path)
        assert len(solution) <= 6
        assert solution["lat_deg"].between(47.4, 48.4).all()


def test_same_seed_reproduces_every_file(tmp_path, config_file):
    _optimize(config_file, tmp_path / "a")
    _optimize(config_file, tmp_path / "b")
    _same_files(tmp_path / "a", tmp_path / "b")


def test_worker_count_does_not_change_results(tmp_path, config_file):
    _optimize(config_file, tmp_path / "serial", threads=1)
    _optimize(config_file, tmp_path / "pool", threads=2)
    _same_files(tmp_path / "serial", tmp_path / "pool")


def test_seed_override_is_recorded(tmp_path, config_file):
    out = tmp_path / "run"
    front, _ = _optimize(config_file, out, seed=21)
    assert front.seed == 21
    assert set(pd.read_csv(out / commands.PARETO_FILE)["seed"]) == {21}


def test_progress_lines_are_json(tmp_path, config_file):
    _, progress = _optimize(config_file, tmp_path / "run")
    records = [json.loads(line) for line in progress.splitlines()]
    assert [r["gen"] for r in records] == list(range(5))
    assert all(r["front_size"] >= 1 and len(r["best"]) == 3 for r in records)


def test_evaluate_reproduces_the_front_rows(tmp_path, config_file):
    out = tmp_path / "run"
    _optimize(config_file, out)
    pareto = pd.read_csv(out / commands.PARETO_FILE)
    for path in _solution_files(out):
        solution_id = int(os.path.basename(path)[len("solution_"):-len(".csv")])
        result = commands.cmd_evaluate(config_file, path, out=str(tmp_path / f"eval_{solution_id}"))
        row = pareto[pareto["id"] == solution_id].iloc[0]
        for column in ("of1", "of2", "of3", "of1_norm", "of2_norm", "of3_norm", "penalty"):
            assert result[column] == pytest.approx(row[column], rel=1e-8, abs=1e-12), column
        assert result["n_sensors"] == row["n_sensors"]

    written = tmp_path / "eval_0"
    scores = json.loads((written / commands.SCORES_FILE).read_text())
    assert set(scores["gdop_fraction_above"]) == {"5", "10", "20", "40", "60", "80", "100"}
    coverage = pd.read_csv(written / commands.COVERAGE_FILE)
    assert len(coverage) == 24
    jam = pd.read_csv(written / commands.JAM_REPORT_FILE)
    assert {"affected", "min_dist"} <= set(jam.columns)


def test_pareto_rows_are_mutually_non_dominated(tmp_path, config_file):
    out = tmp_path / "run"
    _optimize(config_file, out)
    pareto = pd.read_csv(out / commands.PARETO_FILE)
    columns = rk.dominance_columns(pareto)
    assert columns == ["dom_of1", "dom_of2", "dom_of3"]
    vectors = pareto[columns].to_numpy(dtype=float)
    assert np.all((vectors >= 0.0) & (vectors <= 1.0))
    for i in range(len(vectors)):
        for j in range(len(vectors)):
            assert i == j or not dominates(vectors[i], vectors[j])


def test_evaluate_labels_results_with_the_run_seed(tmp_path, config_file):
    out = tmp_path / "run"
    _optimize(config_file, out, seed=21)
    pareto = pd.read_csv(out / commands.PARETO_FILE)
    result = commands.cmd_evaluate(config_file, _solution_files(out)[0], out=str(tmp_path / "eval"))
    assert result["seed"] == 21
    assert result["config_hash"] == pareto["config_hash"].iloc[0]
    assert commands.cmd_evaluate(config_file, _solution_files(out)[0], out=str(tmp_path / "eval2"),
                                 seed=5)["seed"] == 5


def test_evaluate_fixture_sensors(tmp_path, config_file):
    result = commands.cmd_evaluate(config_file, CLUSTERED21, out=str(tmp_path / "baseline"))
    assert result["n_sensors"] == 21
    for column in ("of1", "of2", "of3"):
        assert result[column] >= 0.0 and result[column] != float("inf")
    assert (tmp_path / "baseline" / commands.SCORES_FILE).exists()


def test_augment_keeps_the_deployed_sensors(tmp_path, config_file):
    out = tmp_path / "augment"
    front = commands.cmd_augment(config_file, CLUSTERED21, out=str(out), threads=1, progress=None)
    run = json.loads((out / commands.RUN_FILE).read_text())
    assert run["n_deployed"] == 21
    for path in _solution_files(out):
        solution = pd.read_csv(path)
        assert int(solution["forced"].sum()) == 21
        assert len(solution) <= 21 + 6
    assert all(m.chromosome.popcount >= 21 for m in front.members)


def test_empty_deployment_matches_greenfield(tmp_path, config_file):
    empty = tmp_path / "deployed.csv"
    empty.write_text("id,lat_deg,lon_deg,alt_m\n")
    _optimize(config_file, tmp_path / "scratch")
    commands.cmd_augment(config_file, str(empty), out=str(tmp_path / "augment"), threads=1, progress=None)

    scratch = pd.read_csv(tmp_path / "scratch" / commands.PARETO_FILE).drop(columns="config_hash")
    augmented = pd.read_csv(tmp_path / "augment" / commands.PARETO_FILE).drop(columns="config_hash")
    pd.testing.assert_frame_equal(scratch, augmented)


def _write_front(directory, n_sensors):
    directory.mkdir()
    pd.DataFrame({
        "id": range(len(n_sensors)),
        "n_sensors": n_sensors,
        "of1": [1.0] * len(n_sensors),
        "of2": [2.0] * len(n_sensors),
        "of3": [0.5] * len(n_sensors),
        "of1_norm": [0.2, 0.6][:len(n_sensors)],
        "of2_norm": [0.4, 0.1][:len(n_sensors)],
        "of3_norm": [0.9, 0.0][:len(n_sensors)],
        "penalty": [0.01] * len(n_sensors),
    }).to_csv(directory / commands.PARETO_FILE, index=False)
    return str(directory)


def test_report_picks_a_member(tmp_path):
    front_dir = _write_front(tmp_path / "front", [5, 8])
    stream = io.StringIO()
    assert commands.cmd_report(front_dir, weights=(1.0, 0.0, 0.0), stream=stream) == 0
    assert "selected solution 0" in stream.getvalue()
    assert commands.cmd_report(front_dir, weights=(0.0, 0.0, 1.0), stream=io.StringIO()) == 1
    assert main.run(["report", "--out", front_dir, "--weights", "0,1,0"]) == main.EXIT_OK


def test_report_exit_codes(tmp_path):
    front_dir = _write_front(tmp_path / "front", [5, 8])
    assert main.run(["report", "--out", front_dir, "--budget", "3"]) == main.EXIT_NO_FEASIBLE
    assert main.run(["report", "--out", front_dir, "--weights", "1,1,1"]) == main.EXIT_USAGE
    assert main.run(["report", "--out", front_dir, "--weights", "1,0"]) == main.EXIT_USAGE
    assert main.run(["report", "--out", str(tmp_path / "nowhere")]) == main.EXIT_USAGE


def test_usage_errors(tmp_path, small_config):
    assert main.run([]) == main.EXIT_USAGE
    assert main.run(["optimize"]) == main.EXIT_USAGE
    assert main.run(["--help"]) == main.EXIT_OK

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"ga": {"population_size": 3}}))
    assert main.run(["optimize", "--config", str(bad), "--out", str(tmp_path / "x")]) == main.EXIT_USAGE
    assert main.run(["optimize", "--config", str(tmp_path / "missing.json")]) == main.EXIT_USAGE

    config = write_config(tmp_path / "config.json", small_config)
    malformed = tmp_path / "sensors.csv"
    malformed.write_text("id,lat_deg,lon_deg,alt_m\nA,47.5,east,0\n")
    assert main.run(["evaluate", "--config", config, "--sensors", str(malformed),
                     "--out", str(tmp_path / "eval")]) == main.EXIT_USAGE


def test_optimize_command_line(tmp_path, config_file):
    out = tmp_path / "cli"
    assert main.run(["optimize", "--config", config_file, "--out", str(out), "--threads", "1"]) == main.EXIT_OK
    assert (out / commands.PARETO_FILE).exists()
