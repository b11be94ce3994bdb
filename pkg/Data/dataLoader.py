import json
import logging
import os

import numpy as np
import pandas as pd

from Common.errors import InputFileError
from Data.config import RunConfig

logger = logging.getLogger(__name__)

SENSOR_COLUMNS = ["id", "lat_deg", "lon_deg", "alt_m"]


def loadConfig(path):
    """
    Read a run configuration JSON document.

    :param path: Path to the JSON file.
    :return: A validated RunConfig.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFileError(exc.msg, path, exc.lineno) from exc
    config = RunConfig.from_dict(data)
    logger.info("loaded config %s (hash %s)", path, config.config_hash())
    return config


def _parse_float(value, column, path, line):
    try:
        number = float(value)
    except ValueError:
        raise InputFileError(f"column {column!r}: cannot parse {value!r} as a number", path, line) from None
    if not np.isfinite(number):
        raise InputFileError(f"column {column!r}: value must be finite", path, line)
    return number


def loadSensorCsv(path, bounds=None):
    """
    Load a sensor list (deployed sensors or a solution file).

    Rows are checked one by one so a malformed row is reported with its
    1-based file line. Duplicate positions are dropped with a warning; rows
    outside ``bounds`` are kept with a warning.

    :param path: CSV with header ``id,lat_deg,lon_deg,alt_m`` (extra columns are ignored
        apart from ``forced``).
    :param bounds: Optional object with ``contains(lat, lon)``.
    :return: DataFrame with columns id, lat_deg, lon_deg, alt_m and, when present, forced.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        logger.warning("%s is empty, no sensors loaded", path)
        return pd.DataFrame({c: pd.Series(dtype=float if c != "id" else str) for c in SENSOR_COLUMNS})
    except pd.errors.ParserError as exc:
        raise InputFileError(f"malformed CSV: {exc}", path) from exc

    missing = [c for c in SENSOR_COLUMNS if c not in raw.columns]
    if missing:
        raise InputFileError(f"missing columns {missing}", path, 1)

    records = []
    for offset, row in enumerate(raw.itertuples(index=False)):
        line = offset + 2
        values = row._asdict()
        sensor_id = str(values["id"]).strip()
        if not sensor_id:
            raise InputFileError("empty id", path, line)
        lat = _parse_float(values["lat_deg"], "lat_deg", path, line)
        lon = _parse_float(values["lon_deg"], "lon_deg", path, line)
        alt = _parse_float(values["alt_m"], "alt_m", path, line)
        if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
            raise InputFileError(f"coordinates ({lat}, {lon}) out of range", path, line)
        if alt < 0:
            raise InputFileError("alt_m must be >= 0", path, line)
        record = {"id": sensor_id, "lat_deg": lat, "lon_deg": lon, "alt_m": alt}
        if "forced" in values:
            record["forced"] = str(values["forced"]).strip().lower() in ("1", "true", "yes")
        records.append(record)

    df = pd.DataFrame.from_records(records, columns=SENSOR_COLUMNS + (["forced"] if "forced" in raw.columns else []))

    duplicated = df.duplicated(subset=["lat_deg", "lon_deg", "alt_m"])
    if duplicated.any():
        logger.warning("%s: dropping %d duplicated sensor rows (%s)", path, int(duplicated.sum()),
                       ", ".join(df.loc[duplicated, "id"]))
        df = df.loc[~duplicated].reset_index(drop=True)

    if bounds is not None and len(df):
        outside = ~np.asarray(bounds.contains(df["lat_deg"].to_numpy(), df["lon_deg"].to_numpy()))
        for sensor_id in df.loc[outside, "id"]:
            logger.warning("%s: sensor %s lies outside the area bounds, keeping it", path, sensor_id)

    logger.info("loaded %d sensors from %s", len(df), path)
    return df


def loadRunJson(path):
    """Read run metadata written next to a Pareto front; None when absent."""
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise InputFileError(exc.msg, path, exc.lineno) from exc


def writeJson(data, path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info("wrote %s", path)
