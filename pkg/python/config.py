"""
Configuration settings for the NDOPPE toolkit.
Reads overrides from the environment (and a local .env file) and holds the
numerical defaults shared by the kernels.
"""

import os
from pathlib import Path
from typing import Optional
from dotenv import load_dotenv

load_dotenv()


def _env_bool(name: str, default: str = "False") -> bool:
    return os.getenv(name, default).lower() in ("1", "true", "yes")


# Debug Mode
DEBUG = _env_bool("NDOPPE_DEBUG")

# Logging
LOG_LEVEL = os.getenv("NDOPPE_LOG_LEVEL", "DEBUG" if DEBUG else "WARNING").upper()
LOG_FILE: Optional[str] = os.getenv("NDOPPE_LOG_FILE")

# Output
OUTPUT_DIR = os.getenv("NDOPPE_OUTPUT_DIR", ".")

# Simulation
DEFAULT_SEED = int(os.getenv("NDOPPE_DEFAULT_SEED", "20240601"))
SIM_SHARD_SIZE = int(os.getenv("NDOPPE_SIM_SHARD_SIZE", "250000"))

# Report
REPORT_WORKERS = int(os.getenv("NDOPPE_REPORT_WORKERS", "4"))

# Acceleration
DISABLE_JIT = _env_bool("NDOPPE_DISABLE_JIT")

# Numerical defaults
REL_TOL = 1e-12           # internal relative tolerance of the series kernels
MAX_TERMS = 10_000        # series / continued fraction cap
ROOT_EPS = 1e-12          # theta search interval is (ROOT_EPS, 1 - ROOT_EPS)
TRUNCATION_MASS = 1e-12   # residual mass at which infinite sums stop
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200

# Rendering
SIGNIFICANT_DIGITS = 7


def is_jit_enabled() -> bool:
    """Check if numba acceleration was requested."""
    return not DISABLE_JIT


def resolve_output_path(path: Optional[str]) -> Optional[Path]:
    """Relative output paths are placed under OUTPUT_DIR."""
    if path is None:
        return None
    p = Path(path)
    if p.is_absolute():
        return p
    return Path(OUTPUT_DIR) / p
