import logging
import time
from typing import Any, Dict, Optional

logger = logging.getLogger("performance")


class Timer:
    """Context manager for timing code blocks."""
    def __init__(
        self,
        name: str,
        unit: str = "ms",
        metadata: Optional[Dict[str, Any]] = None,
    ):
        self.name = name
        self.unit = unit
        self.metadata = metadata if metadata is not None else {}
        self.start_time = None
        self.value: Optional[float] = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        end_time = time.perf_counter()
        duration = (end_time - self.start_time)

        if self.unit == "ms":
            val = duration * 1000
        else:
            val = duration

        self.value = val
        self.metadata[self.name] = round(val, 3)
        status = "failed" if exc_type is not None else "done"
        logger.info(f"{self.name} {status} in {val:.1f} {self.unit}")
