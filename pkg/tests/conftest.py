import importlib.util
import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Make the python/ sources importable as `ndoppe` when the package is not installed
try:
    import ndoppe  # noqa: F401
except ImportError:
    src = os.path.join(ROOT, "python")
    spec = importlib.util.spec_from_file_location(
        "ndoppe", os.path.join(src, "__init__.py"), submodule_search_locations=[src])
    module = importlib.util.module_from_spec(spec)
    sys.modules["ndoppe"] = module
    spec.loader.exec_module(module)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_family(rng):
    """Factory for random (coefficients, theta) pairs with r <= 6."""
    from ndoppe.ndoppe import NdoppeDist

    def make(theta_range=(0.05, 0.95), max_r=6):
        r = int(rng.integers(0, max_r + 1))
        a = rng.uniform(0.0, 2.0, size=r + 1)
        a[int(rng.integers(0, r + 1))] += 0.5
        theta = float(rng.uniform(*theta_range))
        return NdoppeDist(a.tolist(), theta)

    return make
