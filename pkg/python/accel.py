"""
Optional numba acceleration for the scalar series kernels.
Provides a `jit` decorator that compiles with numba when it is installed and
enabled, and otherwise leaves the pure Python function untouched.
"""

import logging

from . import config

logger = logging.getLogger(__name__)

try:
    if not config.is_jit_enabled():
        raise ImportError("disabled by NDOPPE_DISABLE_JIT")
    import numba

    JIT_AVAILABLE = True
    logger.debug("✓ numba acceleration loaded successfully")
except ImportError as e:
    numba = None
    JIT_AVAILABLE = False
    logger.debug(f"numba acceleration not available: {e}")
    logger.debug("  Falling back to pure Python kernels")


def jit(func):
    """Compile `func` in nopython mode when numba is available."""
    if JIT_AVAILABLE:
        return numba.njit(cache=True)(func)
    return func
