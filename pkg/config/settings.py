# Centralised app-level constants.
# Import from here rather than defining inline in each module.
import os

from dotenv import load_dotenv

load_dotenv()

ARTIFACT_VERSION = "1.0.0"
REPORT_SCHEMA_VERSION = 1
CALIBRATION_CACHE_VERSION = 1
CALIBRATION_CACHE_FILE = "calibration_cache.json"

# Pseudorandom generator recorded in every report for provenance
PRNG_NAME = "numpy.PCG64"

DEFAULT_RANK = 2
DEFAULT_SEED = 20240601
DEFAULT_MEASURE = "uniform"

# Element-count budgets for enumeration-backed operations
DEFAULT_BUDGET = 10**6
DEFAULT_BUDGETS = {
    "ball": DEFAULT_BUDGET,
    "mixed_ball": DEFAULT_BUDGET,
    "sweep": DEFAULT_BUDGET,
    "growth": 4 * DEFAULT_BUDGET,
    "fold": DEFAULT_BUDGET,
    "neighbourhood": DEFAULT_BUDGET,
}
# growth gates on (mixed ball) x (ball of the same radius); n <= 4 fits for F_2

DEFAULT_C_DELTA = 1.0
# Dominating-constant grid for the tail fit: 0.25, 0.5, ..., 32
C1_GRID = tuple(0.25 * i for i in range(1, 129))
SPEED_QUANTILE = 0.05
DEFAULT_ATTEMPT_LIMIT = 1000

# Calibration workload
CALIBRATION_SPEED_N = 1000
CALIBRATION_SPEED_TRIALS = 200
CALIBRATION_TAIL_N = 1000
CALIBRATION_TAIL_TRIALS = 2000
CALIBRATION_SOUNDNESS_SAMPLES = 200
CALIBRATION_PROBE = "abababababababab"

# W_n sampling caps used by soundness checks
W_N_SYLLABLE_CAP = 20
W_N_EXPONENT_CAP = 5

# Environment from .env or process environment
OUTPUT_DIR = os.getenv("MIF_OUTPUT_DIR", "mif_reports")
LOG_LEVEL = os.getenv("MIF_LOG_LEVEL", "WARNING")
