"""
Maximum-likelihood fitting of NDOPPE, Poisson and negative binomial models to
grouped count data, plus the goodness-of-fit statistics reported per table.

For a fixed coefficient vector the NDOPPE log-likelihood has a single score
equation whose root is the moment equation mean(theta) = sample mean, so the
MLE is found by bisection on the monotone mean.
"""

import logging
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.optimize import bisect, minimize_scalar

from . import config
from .baselines import CountModel, NegBinDist, PoissonDist
from .errors import (
    DegenerateError,
    DomainError,
    DuplicateCountError,
    EmptyDatasetError,
    NegativeFrequencyError,
    NoRootError,
    ParameterError,
)
from .ndoppe import CoefficientVector, NdoppeDist

logger = logging.getLogger("ndoppe_fitting")

MODEL_NAMES = ("poisson", "negbin", "ndoppe")
NEGBIN_LOG_R_BOUNDS = (-10.0, 10.0)


def check_cells(cells: Iterable[Tuple[int, int]]) -> List[Tuple[int, int]]:
    """Validate (count, frequency) cells and return them sorted by count."""
    out = []
    for x, freq in cells:
        if int(x) != x or x < 0:
            raise DomainError(f"count values must be nonnegative integers, got {x}")
        if int(freq) != freq:
            raise DomainError(f"frequencies must be integers, got {freq} for count {x}")
        if freq < 0:
            raise NegativeFrequencyError(f"frequency for count {x} is negative ({freq})")
        out.append((int(x), int(freq)))
    out.sort(key=lambda cell: cell[0])
    for (x0, _), (x1, _) in zip(out, out[1:]):
        if x0 == x1:
            raise DuplicateCountError(f"count {x0} appears more than once")
    if not out or sum(f for _, f in out) < 1:
        raise EmptyDatasetError("dataset has no observations")
    return out


class CountDataset(BaseModel):
    """Grouped count data: strictly increasing count values with observed frequencies."""
    model_config = ConfigDict(frozen=True)

    name: str = ""
    cells: List[Tuple[int, int]]

    @model_validator(mode="after")
    def _cells_are_valid(self):
        if check_cells(self.cells) != list(self.cells):
            raise ValueError("count values must be strictly increasing")
        return self

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]], name: str = "") -> "CountDataset":
        """Build from unsorted pairs, raising DatasetError subclasses directly."""
        return cls(name=name, cells=check_cells(pairs))

    @property
    def counts(self) -> np.ndarray:
        return np.array([x for x, _ in self.cells], dtype=np.int64)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([f for _, f in self.cells], dtype=np.int64)

    @property
    def n(self) -> int:
        return int(sum(f for _, f in self.cells))

    @property
    def total(self) -> int:
        """Sum of all observed counts."""
        return int(sum(x * f for x, f in self.cells))

    @property
    def mean(self) -> float:
        return self.total / self.n


class FitResult(BaseModel):
    model: str
    params: Dict[str, float]
    coeffs: Optional[List[float]] = None
    counts: List[int]
    observed: List[int]
    fitted_counts: List[float]
    nll: float
    chi_sq: float
    boundary_hit: bool = False

    def to_dist(self) -> Union[NdoppeDist, PoissonDist, NegBinDist]:
        """Rebuild the fitted distribution."""
        if self.model == "ndoppe":
            return NdoppeDist(self.coeffs, self.params["theta"])
        if self.model == "poisson":
            return PoissonDist(self.params["alpha"])
        if self.model == "negbin":
            return NegBinDist(self.params["r"], self.params["p"])
        raise ParameterError(f"unknown model tag {self.model!r}")


class FitReport(BaseModel):
    dataset: CountDataset
    fits: List[FitResult]
    metadata: Dict[str, Any] = {}

    def fit_for(self, model: str) -> FitResult:
        for fit in self.fits:
            if fit.model == model:
                return fit
        raise KeyError(model)


# --- statistics --------------------------------------------------------------

def neg_log_likelihood(data: CountDataset, model: CountModel) -> float:
    """-sum_x O_x ln p(x)."""
    freqs = data.frequencies.astype(float)
    logp = np.asarray(model.logpmf(data.counts), dtype=float)
    mask = freqs > 0
    return float(-np.dot(freqs[mask], logp[mask]))


def chi_square(data: CountDataset, fit: FitResult) -> float:
    """Pearson statistic over exactly the listed cells, without pooling or a tail cell."""
    if list(fit.counts) != [int(x) for x in data.counts]:
        raise DomainError("fit cells do not match the dataset cells")
    observed = data.frequencies.astype(float)
    expected = np.asarray(fit.fitted_counts, dtype=float)
    if np.any(expected <= 0):
        logger.warning(f"{fit.model}: expected count underflows to 0 in some cell; chi-square is infinite")
        return math.inf
    return float(np.sum((observed - expected) ** 2 / expected))


def _fit_result(data: CountDataset, model: str, dist, params: Dict[str, float],
                coeffs: Optional[CoefficientVector] = None,
                boundary_hit: bool = False) -> FitResult:
    fitted = data.n * np.asarray(dist.pmf(data.counts), dtype=float)
    result = FitResult(
        model=model,
        params=params,
        coeffs=coeffs.as_list() if coeffs is not None else None,
        counts=[int(x) for x in data.counts],
        observed=[int(f) for f in data.frequencies],
        fitted_counts=[float(v) for v in fitted],
        nll=neg_log_likelihood(data, dist),
        chi_sq=0.0,
        boundary_hit=boundary_hit,
    )
    return result.model_copy(update={"chi_sq": chi_square(data, result)})


# --- estimators --------------------------------------------------------------

def _require_positive_mean(data: CountDataset):
    if data.total == 0:
        raise DegenerateError("all observations are zero; the sample mean must be positive")


def solve_theta(coeffs: Union[CoefficientVector, Iterable[float]], xbar: float) -> float:
    """
    Root of mean(theta) = xbar on (ROOT_EPS, 1 - ROOT_EPS).
    Bisection brackets the root; one Newton step on the exact derivative
    dmean/dtheta = -var/(1-theta) then removes the last ulps when it helps.
    """
    coeffs = CoefficientVector.of(coeffs)
    lo, hi = config.ROOT_EPS, 1.0 - config.ROOT_EPS

    def excess(theta):
        return NdoppeDist(coeffs, theta).mean() - xbar

    if excess(lo) < 0:
        raise NoRootError(f"sample mean {xbar} exceeds the largest attainable mean "
                          f"{NdoppeDist(coeffs, lo).mean()} for a={list(coeffs.a)}")
    if excess(hi) > 0:
        raise NoRootError(f"sample mean {xbar} is below the smallest attainable mean "
                          f"{NdoppeDist(coeffs, hi).mean()} for a={list(coeffs.a)}")

    theta = bisect(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
    dist = NdoppeDist(coeffs, theta)
    resid = dist.mean() - xbar
    polished = theta + resid * (1.0 - theta) / dist.variance()
    if lo < polished < hi and abs(excess(polished)) < abs(resid):
        theta = polished
    logger.debug(f"theta solved: {theta!r} (mean residual {excess(theta):.3e})")
    return theta


def mle_ndoppe(data: CountDataset, coeffs: Union[CoefficientVector, Iterable[float]]) -> FitResult:
    coeffs = CoefficientVector.of(coeffs)
    _require_positive_mean(data)
    theta = solve_theta(coeffs, data.mean)
    logger.info(f"NDOPPE fit on {data.name or 'dataset'}: a={list(coeffs.a)} theta={theta:.10g}")
    return _fit_result(data, "ndoppe", NdoppeDist(coeffs, theta), {"theta": theta}, coeffs=coeffs)


def mle_poisson(data: CountDataset) -> FitResult:
    alpha = data.mean
    dist = PoissonDist(alpha)
    logger.info(f"Poisson fit on {data.name or 'dataset'}: alpha={alpha:.10g}")
    return _fit_result(data, "poisson", dist, {"alpha": alpha})


def mle_negbin(data: CountDataset) -> FitResult:
    """
    Profile likelihood: for fixed r the MLE of p is xbar/(r + xbar); the
    remaining one dimensional problem is solved on log r with bounded Brent.
    """
    _require_positive_mean(data)
    xbar = data.mean

    def dist_for(log_r: float) -> NegBinDist:
        r = math.exp(log_r)
        return NegBinDist(r, xbar / (r + xbar))

    def profile_nll(log_r: float) -> float:
        return neg_log_likelihood(data, dist_for(log_r))

    lo, hi = NEGBIN_LOG_R_BOUNDS
    res = minimize_scalar(profile_nll, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10, "maxiter": 1000})
    log_r = float(res.x)
    # Brent stops short of the interval ends; a bound that is no worse than
    # the returned point is the actual optimum
    slack = 1e-9 * max(1.0, abs(float(res.fun)))
    boundary_hit = False
    for bound in (lo, hi):
        if profile_nll(bound) <= float(res.fun) + slack:
            log_r, boundary_hit = bound, True
            break
    if boundary_hit:
        shape = "Poisson-like" if log_r == hi else "extremely over-dispersed"
        logger.warning(f"negative binomial fit on {data.name or 'dataset'} reached the log r "
                       f"search bound ({log_r:.4f}); the data look {shape}")
    dist = dist_for(log_r)
    logger.info(f"NB fit on {data.name or 'dataset'}: r={dist.r_param:.10g} p={dist.p_fail:.10g}")
    return _fit_result(data, "negbin", dist, {"r": dist.r_param, "p": dist.p_fail},
                       boundary_hit=boundary_hit)


def fit_models(data: CountDataset, models: Sequence[str] = MODEL_NAMES,
               coeffs: Union[CoefficientVector, Iterable[float], None] = None) -> FitReport:
    """Run the requested estimators in the given order."""
    fits = []
    for name in models:
        if name == "poisson":
            fits.append(mle_poisson(data))
        elif name == "negbin":
            fits.append(mle_negbin(data))
        elif name == "ndoppe":
            if coeffs is None:
                raise ParameterError("the ndoppe model needs a coefficient vector")
            fits.append(mle_ndoppe(data, coeffs))
        else:
            raise ParameterError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    return FitReport(dataset=data, fits=fits)


def fit_at(data: CountDataset, model: str, params: Dict[str, float],
           coeffs: Union[CoefficientVector, Iterable[float], None] = None) -> FitResult:
    """Fitted cells and statistics of a model at given parameters, without estimation."""
    try:
        if model == "poisson":
            dist = PoissonDist(params["alpha"])
        elif model == "negbin":
            dist = NegBinDist(params["r"], params["p"])
        elif model == "ndoppe":
            if coeffs is None:
                raise ParameterError("the ndoppe model needs a coefficient vector")
            coeffs = CoefficientVector.of(coeffs)
            dist = NdoppeDist(coeffs, params["theta"])
        else:
            raise ParameterError(f"unknown model {model!r}; choose from {', '.join(MODEL_NAMES)}")
    except KeyError as e:
        raise ParameterError(f"{model} parameters are missing {e.args[0]!r}") from e
    return _fit_result(data, model, dist, dict(params), coeffs=coeffs if model == "ndoppe" else None)


# --- diagnostics -------------------------------------------------------------

def score(data: CountDataset, dist: NdoppeDist) -> float:
    """
    d/dtheta of the log-likelihood: n h'(theta)/h(theta) - sum x / (1 - theta),
    with h'/h = (1/theta) sum_k w_k (k+1).
    """
    theta = dist.theta
    log_h_prime = float(np.dot(dist.weights, np.arange(dist.r + 1) + 1.0)) / theta
    return data.n * log_h_prime - data.total / (1.0 - theta)


def local_optimality_gap(data: CountDataset, fit: FitResult, delta: float) -> float:
    """min NLL(theta +/- delta) - NLL(theta); nonnegative at a local maximum of the likelihood."""
    if fit.model != "ndoppe":
        raise ParameterError("local optimality is checked for NDOPPE fits only")
    theta = fit.params["theta"]
    nll = neg_log_likelihood(data, fit.to_dist())
    neighbours = [neg_log_likelihood(data, NdoppeDist(fit.coeffs, t))
                  for t in (theta - delta, theta + delta) if 0.0 < t < 1.0]
    return min(neighbours) - nll
