"""NDOPPE count distributions, model fitting and compound aggregate claims."""

__version__ = "1.0.0"

from .errors import NdoppeError
from .ndoppe import CoefficientVector, NdoppeDist, stress_strength
from .baselines import NegBinDist, PoissonDist
from .fitting import CountDataset, FitReport, FitResult, mle_negbin, mle_ndoppe, mle_poisson
from .compound import make_model
