"""
Script to generate tabulated nonlinearity fixtures for fracblowup.
Samples f(t) = t^p ln^alpha(1+t) on a log grid and writes a two-column CSV.
"""
import os
import logging
from pathlib import Path

import numpy as np

from fracblowup.db.result_store import result_store
from fracblowup.models.nonlinearity import NonlinearityModel, eval_f

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

# Fixture settings
TABLE_DIR = os.getenv("FRACBLOWUP_TABLE_DIR", "tables")
T_MIN = float(os.getenv("FRACBLOWUP_TABLE_T_MIN", "1e-8"))
T_MAX = float(os.getenv("FRACBLOWUP_TABLE_T_MAX", "1e12"))
SAMPLES = int(os.getenv("FRACBLOWUP_TABLE_SAMPLES", "2001"))

# (name, p, alpha)
FIXTURES = [
    ("power_2.5", 2.5, 0.0),
    ("power_4", 4.0, 0.0),
    ("powerlog_3_1", 3.0, 1.0),
    ("powerlog_3_-2", 3.0, -2.0),
    ("powerlog_2_1.5", 2.0, 1.5),
]


def write_table(directory: Path, name: str, p: float, alpha: float) -> Path:
    """Sample one model and write it as t,f rows."""
    model = NonlinearityModel.power(p) if alpha == 0.0 else NonlinearityModel.power_log(p, alpha)
    t = np.geomspace(T_MIN, T_MAX, SAMPLES)
    f = np.asarray(eval_f(model, t))
    if np.any(np.diff(f) <= 0):
        raise ValueError(f"{name} is not increasing on [{T_MIN}, {T_MAX}]")
    return result_store.write_columns(directory / f"{name}.csv", ["t", "f"], [t, f])


def main():
    """Main function to generate the fixtures."""
    try:
        directory = result_store.run_dir(TABLE_DIR)
        for name, p, alpha in FIXTURES:
            path = write_table(directory, name, p, alpha)
            logger.info(f"Wrote {name} ({SAMPLES} samples) to {path}")
        logger.info("Tabulated nonlinearity generation completed successfully!")
    except Exception as e:
        logger.error(f"Error generating tables: {str(e)}")
        raise SystemExit(1)


if __name__ == "__main__":
    main()
