"""
Poisson and negative binomial count models used as comparison columns.
"""

import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from scipy.special import gammaln, gammaincc, xlogy

from .errors import DomainError, ParameterError
from .ndoppe import ArrayLike, check_counts
from .specfun import reg_inc_beta


@runtime_checkable
class CountModel(Protocol):
    """What fitting and simulation need from a count distribution."""

    def logpmf(self, x: ArrayLike): ...

    def pmf(self, x: ArrayLike): ...

    def mean(self) -> float: ...

    def variance(self) -> float: ...


@dataclass(frozen=True)
class PoissonDist:
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ParameterError(f"Poisson rate alpha must be > 0, got {self.alpha}")

    def logpmf(self, x: ArrayLike):
        arr = check_counts(x)
        out = xlogy(arr, self.alpha) - self.alpha - gammaln(arr + 1.0)
        return float(out) if np.ndim(out) == 0 else out

    def pmf(self, x: ArrayLike):
        out = np.exp(self.logpmf(x))
        return float(out) if np.ndim(out) == 0 else out

    def cdf(self, x: int) -> float:
        if x < 0:
            return 0.0
        return float(gammaincc(x + 1.0, self.alpha))

    def mean(self) -> float:
        return self.alpha

    def variance(self) -> float:
        return self.alpha


@dataclass(frozen=True)
class NegBinDist:
    """Failures before the r-th success; p_fail is the per-trial failure probability."""
    r_param: float
    p_fail: float

    def __post_init__(self):
        if not (math.isfinite(self.r_param) and self.r_param > 0):
            raise ParameterError(f"negative binomial r must be > 0, got {self.r_param}")
        if not (0.0 < self.p_fail < 1.0):
            raise ParameterError(f"negative binomial p must satisfy 0 < p < 1, got {self.p_fail}")

    def logpmf(self, x: ArrayLike):
        arr = check_counts(x)
        r, p = self.r_param, self.p_fail
        out = (gammaln(arr + r) - gammaln(r) - gammaln(arr + 1.0)
               + r * math.log1p(-p) + arr * math.log(p))
        return float(out) if np.ndim(out) == 0 else out

    def pmf(self, x: ArrayLike):
        out = np.exp(self.logpmf(x))
        return float(out) if np.ndim(out) == 0 else out

    def cdf(self, x: int) -> float:
        if x < 0:
            return 0.0
        return reg_inc_beta(1.0 - self.p_fail, self.r_param, x + 1.0)

    def mean(self) -> float:
        return self.r_param * self.p_fail / (1.0 - self.p_fail)

    def variance(self) -> float:
        return self.r_param * self.p_fail / (1.0 - self.p_fail) ** 2


def poisson_pmf(d: PoissonDist, x: int) -> float:
    """e^-alpha alpha^x / x!"""
    if x < 0:
        raise DomainError(f"x must be a nonnegative integer, got {x}")
    return d.pmf(x)


def negbin_pmf(d: NegBinDist, x: int) -> float:
    """Gamma(x+r) / (Gamma(r) x!) (1-p)^r p^x"""
    if x < 0:
        raise DomainError(f"x must be a nonnegative integer, got {x}")
    return d.pmf(x)
