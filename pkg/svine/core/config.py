"""
Runtime configuration and numerical defaults.

Settings come from the environment (optionally a .env file in the working
directory). Numerical constants are shared by all core modules.
"""

import os
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# --- Numerical defaults ---
CLAMP_EPS = 1e-12
H_INVERSE_TOL = 1e-10
H_INVERSE_TARGET = 1e-14
H_INVERSE_MAX_ITER = 200
FRANK_THETA_BOUND = 50.0
JOE_THETA_MAX = 500.0
TAU_ZERO = 1e-10

DEFAULT_TRUNCATION = 30
DEFAULT_HORIZON = 30
DEFAULT_NEGATIVE_ROTATION = 90

MA_WEIGHT_CUTOFF = 1e-14
MA_WEIGHT_CAP = 100_000

HESSIAN_STEP = 1e-4


def get_thread_cap() -> int:
    """Maximum number of worker threads (SVINE_THREADS, default: CPU count)."""
    raw = os.getenv("SVINE_THREADS")
    default = os.cpu_count() or 1
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return max(1, value)


def get_log_dir() -> str:
    """Directory for log files (SVINE_LOG_DIR, default: ./logs)."""
    return os.getenv("SVINE_LOG_DIR") or os.path.join(os.getcwd(), "logs")


def get_log_level(default: Optional[str] = None) -> str:
    return (os.getenv("SVINE_LOG_LEVEL") or default or "INFO").upper()
