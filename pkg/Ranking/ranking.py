import logging
import os

import numpy as np
import pandas as pd

from Common.errors import InvalidInputError, NoFeasibleSolutionError
from Objectives.fitness import OBJECTIVE_NAMES
from Objectives.objectives import check_weights

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"


def convertDfToCsv(df, path):
    """
    Saves the given DataFrame as a CSV file, floats with 9 significant digits.

    :param df: The DataFrame to save.
    :param path: Destination file.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("wrote %s (%d rows)", path, len(df))
    return path


def readCsvToDf(path):
    """
    Reads a CSV file into a DataFrame.

    :param path: The CSV file.
    :return: The DataFrame; raises FileNotFoundError when the file is missing.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    df = pd.read_csv(path)
    logger.debug("loaded %s (%d rows)", path, len(df))
    return df


def pareto_summary(front):
    """
    One row per front member: id, n_sensors, raw and normalized objectives,
    direction scores, penalty, acceptance flags, the ``dom_*`` vector the
    members were ranked on and run metadata. Rows are mutually non-dominated
    on the ``dom_*`` columns.

    :param front: A ParetoFront.
    """
    if len(front.members) == 0:
        raise InvalidInputError("Pareto front is empty")
    rows = []
    for solution_id, member in enumerate(front.members):
        record = {"id": solution_id}
        record.update(member.scores.as_record())
        labels = front.objective_labels or tuple(str(i) for i in range(len(member.objectives)))
        record.update({f"dom_{label}": float(v) for label, v in zip(labels, member.objectives)})
        record["config_hash"] = front.config_hash
        record["seed"] = front.seed
        rows.append(record)
    return pd.DataFrame(rows)


def dominance_columns(df):
    return [c for c in df.columns if c.startswith("dom_")]


def rankSolutions(df, weights=(1 / 3, 1 / 3, 1 / 3), budget_cap=None):
    """
    Filters and ranks Pareto members by a weighted normalized objective score.

    :param df: Summary table as produced by pareto_summary (or read back from pareto.csv).
    :param weights: Per-objective weights (of1, of2, of3), non-negative and summing to 1.
    :param budget_cap: Maximum number of sensors; None keeps every member.
    :return: Feasible members sorted best first, with a ``score`` column.
    """
    weights = check_weights(weights, "weights")
    if len(weights) != len(OBJECTIVE_NAMES):
        raise InvalidInputError("need one weight per objective")

    # Filter out members over budget
    if budget_cap is not None:
        df = df[df["n_sensors"] <= budget_cap]
    df = df.copy()

    norm = np.column_stack([df[f"{name}_norm"].to_numpy(dtype=float) for name in OBJECTIVE_NAMES]) \
        if len(df) else np.zeros((0, len(OBJECTIVE_NAMES)))
    df["score"] = norm @ weights

    return df.sort_values(by=["score", "n_sensors", "id"], kind="mergesort").reset_index(drop=True)


def select_solution(df, budget_cap=None, weights=(1 / 3, 1 / 3, 1 / 3)):
    """
    Id of the member minimizing the weighted normalized objective sum under the
    sensor budget; ties go to fewer sensors, then the lower id.
    """
    ranked = rankSolutions(df, weights, budget_cap)
    if ranked.empty:
        raise NoFeasibleSolutionError(f"no Pareto member uses at most {budget_cap} sensors")
    best = ranked.iloc[0]
    logger.info("selected solution %s (%d sensors, score %.6g)", best["id"], best["n_sensors"], best["score"])
    return int(best["id"])
