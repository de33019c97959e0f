"""
Numeric Defaults

Every tunable constant of the toolkit is read here from the environment
(python-dotenv loads a local .env first), converted, and validated. Invalid
values are logged and replaced by the built-in default so a typo in .env never
changes a result silently.

Primary values:
  - LATTICE_SCALE, DELTA, SCALING_DELTA, A_GRID: Kummer construction parameters.
  - U_MIN, JET_MAX_ORDER: numerical floors and ceilings.
  - SEED, TRIALS, THREADS: reproducibility and sweep sizing.
  - GEODESIC_STEP, FOURIER_MODES, FD_STEP: discretization parameters.
  - REPORT_TIMESTAMP: whether report metadata carries a wall-clock timestamp.
"""
import os
import logging
from dotenv import load_dotenv

load_dotenv()


def _float_env(name: str, default: str) -> float:
    raw = os.getenv(name, default)
    try:
        return float(raw)
    except ValueError:
        logging.warning(f"Invalid value for {name}: '{raw}'. Using default {default}.")
        return float(default)


def _int_env(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        return int(raw)
    except ValueError:
        logging.warning(f"Invalid value for {name}: '{raw}'. Using default {default}.")
        return int(default)


def _grid_env(name: str, default: str) -> tuple:
    raw = os.getenv(name, default)
    try:
        values = tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError:
        values = ()
    if not values or any(v <= 0 for v in values):
        logging.warning(f"Invalid grid for {name}: '{raw}'. Using default {default}.")
        values = tuple(float(v) for v in default.split(","))
    return values


LATTICE_SCALE = _float_env("KUMMER_LATTICE_SCALE", "8.0")
DELTA = _float_env("KUMMER_DELTA", "0.1")
SCALING_DELTA = _float_env("KUMMER_SCALING_DELTA", "0.5")
A_GRID = _grid_env("KUMMER_A_GRID", "0.02,0.05,0.1,0.2")

U_MIN = _float_env("KUMMER_U_MIN", "1e-6")
JET_MAX_ORDER = _int_env("KUMMER_JET_MAX_ORDER", "6")

SEED = _int_env("KUMMER_SEED", "42")
TRIALS = _int_env("KUMMER_TRIALS", "200")
THREADS = _int_env("KUMMER_THREADS", "4")

GEODESIC_STEP = _float_env("KUMMER_GEODESIC_STEP", "1e-3")
FOURIER_MODES = _int_env("KUMMER_FOURIER_MODES", "32")
FD_STEP = _float_env("KUMMER_FD_STEP", "2e-2")

REPORT_TIMESTAMP = os.getenv("KUMMER_REPORT_TIMESTAMP", "true").lower() in ("true", "1", "yes")

# Validate ranges
if not (0.0 < DELTA <= 0.5):
    logging.warning(f"KUMMER_DELTA={DELTA} outside (0, 1/2]. Using 0.1.")
    DELTA = 0.1
if not (0.0 < SCALING_DELTA <= 0.5):
    logging.warning(f"KUMMER_SCALING_DELTA={SCALING_DELTA} outside (0, 1/2]. Using 0.5.")
    SCALING_DELTA = 0.5
if not (1 <= JET_MAX_ORDER <= 6):
    logging.warning(f"KUMMER_JET_MAX_ORDER={JET_MAX_ORDER} outside [1, 6]. Using 6.")
    JET_MAX_ORDER = 6
if THREADS < 1:
    logging.warning(f"KUMMER_THREADS={THREADS} must be positive. Using 1.")
    THREADS = 1
if U_MIN <= 0.0:
    logging.warning(f"KUMMER_U_MIN={U_MIN} must be positive. Using 1e-6.")
    U_MIN = 1e-6
