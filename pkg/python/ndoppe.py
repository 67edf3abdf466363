"""
The NDOPPE (natural discrete one parameter polynomial exponential) family.

A member is fixed by known nonnegative coefficients a_0..a_r and a success
probability theta. It is the finite mixture of negative binomial laws
NB(k+1, theta), k = 0..r, with weights

    w_k = a_k k! / theta^(k+1) / D(theta),   D(theta) = sum_k a_k k! / theta^(k+1),

so that p(x) = h(theta) * sum_k a_k (x+k)!/x! * (1-theta)^x with h = 1/D.
All factorials are handled in log space; r and x in the hundreds are fine.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from . import config
from .errors import DegenerateError, DomainError, ParameterError
from .specfun import reg_inc_beta

logger = logging.getLogger("ndoppe_distribution")

ArrayLike = Union[int, float, Sequence[int], np.ndarray]


@dataclass(frozen=True)
class CoefficientVector:
    """Known nonnegative constants a_0..a_r; the index is k."""
    a: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.a)
        object.__setattr__(self, "a", values)
        if len(values) < 1:
            raise ParameterError("coefficient vector must have at least one entry (a_0)")
        for k, v in enumerate(values):
            if not math.isfinite(v):
                raise ParameterError(f"coefficient a_{k} must be finite, got {v}")
            if v < 0:
                raise ParameterError(f"coefficient a_{k} must be nonnegative, got {v}")
        if not any(v > 0 for v in values):
            raise ParameterError("at least one coefficient a_k must be positive")

    @property
    def r(self) -> int:
        return len(self.a) - 1

    @classmethod
    def of(cls, values: Union["CoefficientVector", Iterable[float]]) -> "CoefficientVector":
        if isinstance(values, cls):
            return values
        return cls(tuple(values))

    @classmethod
    def parse(cls, text: str) -> "CoefficientVector":
        """Parse a comma separated list such as "1,3.35"."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return cls(tuple(float(p) for p in parts))
        except ValueError as e:
            if isinstance(e, ParameterError):
                raise
            raise ParameterError(f"coefficients must be comma separated reals, got {text!r}") from e

    def as_list(self) -> List[float]:
        return list(self.a)

    def __str__(self):
        return ",".join(f"{v:g}" for v in self.a)


def check_counts(x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr != np.floor(arr)):
        raise DomainError(f"count arguments must be nonnegative integers, got {x}")
    return arr


def _stirling2(j: int) -> List[int]:
    """Stirling numbers of the second kind S(j, 1..j)."""
    row = [1]
    for n in range(2, j + 1):
        new = [0] * n
        for i in range(1, n + 1):
            left = row[i - 2] if i >= 2 else 0
            keep = i * row[i - 1] if i <= n - 1 else 0
            new[i - 1] = left + keep
        row = new
    return row


class NdoppeDist:
    """An immutable (coefficients, theta) pair with cached mixture weights."""

    __slots__ = ("_coeffs", "_theta", "_k", "_log_a", "_log_c", "_log_d", "_weights")

    def __init__(self, coeffs: Union[CoefficientVector, Iterable[float]], theta: float):
        coeffs = CoefficientVector.of(coeffs)
        theta = float(theta)
        if not (0.0 < theta < 1.0):
            raise ParameterError(f"theta must satisfy 0 < theta < 1, got {theta}")

        a = np.asarray(coeffs.a)
        k = np.arange(a.size, dtype=float)
        log_a = np.full(a.size, -np.inf)
        positive = a > 0
        log_a[positive] = np.log(a[positive])
        log_c = log_a + gammaln(k + 1.0) - (k + 1.0) * math.log(theta)
        log_d = float(logsumexp(log_c))
        weights = np.exp(log_c - log_d)
        weights.setflags(write=False)

        self._coeffs = coeffs
        self._theta = theta
        self._k = k
        self._log_a = log_a
        self._log_c = log_c
        self._log_d = log_d
        self._weights = weights

    # --- construction helpers -------------------------------------------------

    @classmethod
    def geometric(cls, theta: float) -> "NdoppeDist":
        """r = 0, a_0 = 1."""
        return cls([1.0], theta)

    @classmethod
    def ndl(cls, theta: float) -> "NdoppeDist":
        """Natural discrete Lindley: r = 1, a_0 = a_1 = 1."""
        return cls([1.0, 1.0], theta)

    def with_theta(self, theta: float) -> "NdoppeDist":
        return NdoppeDist(self._coeffs, theta)

    # --- accessors --------------------------------------------------------------

    @property
    def coeffs(self) -> CoefficientVector:
        return self._coeffs

    @property
    def theta(self) -> float:
        return self._theta

    @property
    def r(self) -> int:
        return self._coeffs.r

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def log_d(self) -> float:
        """ln D(theta)."""
        return self._log_d

    @property
    def h(self) -> float:
        """h(theta) = 1 / D(theta)."""
        return math.exp(-self._log_d)

    def _components(self):
        """(k, w_k) for the components carrying mass."""
        return [(int(k), float(w)) for k, w in zip(self._k, self._weights) if w > 0]

    def __repr__(self):
        return f"NdoppeDist(a=[{self._coeffs}], theta={self._theta:g})"

    # --- mass function ----------------------------------------------------------

    def logpmf(self, x: ArrayLike):
        arr = check_counts(x)
        xs = arr[..., None]
        terms = self._log_a + gammaln(xs + self._k + 1.0) - gammaln(xs + 1.0)
        out = logsumexp(terms, axis=-1) - self._log_d + arr * math.log1p(-self._theta)
        return float(out) if np.ndim(out) == 0 else out

    def pmf(self, x: ArrayLike):
        out = np.exp(self.logpmf(x))
        return float(out) if np.ndim(out) == 0 else out

    def pmf_recursive(self, x_max: int) -> List[float]:
        """
        p(0), ..., p(x_max) from p(0) = sum a_k k! / D and
        p(x+1) = (1-theta)/(x+1) * sum a_k (x+k+1)! / sum a_k (x+k)! * p(x).
        """
        if x_max < 0:
            raise DomainError(f"x_max must be nonnegative, got {x_max}")
        xs = np.arange(x_max + 2, dtype=float)[:, None]
        log_fact_sums = logsumexp(self._log_a + gammaln(xs + self._k + 1.0), axis=1)
        ratio = 1.0 - self._theta
        probs = [math.exp(log_fact_sums[0] - self._log_d)]
        for x in range(x_max):
            step = ratio / (x + 1.0) * math.exp(log_fact_sums[x + 1] - log_fact_sums[x])
            probs.append(probs[-1] * step)
        return probs

    def cdf(self, x: int) -> float:
        """P(X <= x) = sum_k w_k I_theta(k+1, x+1)."""
        if x < 0:
            return 0.0
        total = sum(w * reg_inc_beta(self._theta, k + 1, x + 1) for k, w in self._components())
        return min(total, 1.0)

    def survival(self, t: int) -> float:
        """P(X >= t) = sum_k w_k I_{1-theta}(t, k+1), the exact complement of cdf(t-1)."""
        if t <= 0:
            return 1.0
        q = 1.0 - self._theta
        total = sum(w * reg_inc_beta(q, t, k + 1) for k, w in self._components())
        return min(total, 1.0)

    def hazard(self, t: int) -> float:
        """Failure rate p(t) / P(X >= t)."""
        if t < 0:
            raise DomainError(f"hazard requires t >= 0, got {t}")
        surv = self.survival(t)
        if surv <= 0.0:
            raise DegenerateError(f"survival underflows to 0 at t={t}; hazard is undefined")
        return self.pmf(t) / surv

    def _first_with_tail_at_most(self, mass: float) -> int:
        """Smallest x with P(X > x) <= mass."""
        def ok(x):
            return self.survival(x + 1) <= mass

        if ok(0):
            return 0
        hi = 1
        while not ok(hi):
            hi *= 2
        lo = hi // 2  # not ok(lo) holds
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        return hi

    def quantile(self, q: float) -> int:
        """First x with cdf(x) >= q."""
        if not 0.0 <= q < 1.0:
            raise DomainError(f"quantile requires 0 <= q < 1, got {q}")
        return self._first_with_tail_at_most(1.0 - q)

    def support_bound(self, mass: float = 1e-13) -> int:
        """Smallest x whose upper tail beyond x holds at most `mass`."""
        if not 0.0 < mass < 1.0:
            raise DomainError(f"mass must lie in (0, 1), got {mass}")
        return self._first_with_tail_at_most(mass)

    # --- moments ----------------------------------------------------------------

    def factorial_moment(self, m: int) -> float:
        """E[X(X-1)...(X-m+1)] = h (thetabar/theta)^m sum_k a_k Gamma(m+k+1) / theta^(k+1)."""
        if m < 1:
            raise DomainError(f"factorial moment order must be >= 1, got {m}")
        odds = (1.0 - self._theta) / self._theta
        rising = np.exp(gammaln(self._k + m + 1.0) - gammaln(self._k + 1.0))
        return float(odds ** m * np.dot(self._weights, rising))

    def raw_moment(self, j: int) -> float:
        """E[X^j] = sum_i S(j, i) E[X_(i)] with S the Stirling numbers of the second kind."""
        if j < 1:
            raise DomainError(f"raw moment order must be >= 1, got {j}")
        return float(sum(s * self.factorial_moment(i)
                         for i, s in enumerate(_stirling2(j), start=1)))

    def mean(self) -> float:
        """sum_k w_k (k+1) thetabar / theta."""
        odds = (1.0 - self._theta) / self._theta
        return float(odds * np.dot(self._weights, self._k + 1.0))

    def variance(self) -> float:
        m1 = self.mean()
        return self.factorial_moment(2) + m1 - m1 * m1

    def index_of_dispersion(self) -> float:
        return self.variance() / self.mean()

    # --- generating functions -----------------------------------------------------

    def _log_mix(self, log_base: float) -> float:
        positive = self._weights > 0
        return float(logsumexp(np.log(self._weights[positive])
                               + (self._k[positive] + 1.0) * log_base))

    def cgf(self, t: float) -> float:
        """ln M(t) for t < -ln(1 - theta)."""
        radius = -math.log1p(-self._theta)
        if t >= radius:
            raise DomainError(f"mgf requires t < -ln(1-theta) = {radius}, got {t}")
        one_minus = -math.expm1(math.log1p(-self._theta) + t)
        return self._log_mix(math.log(self._theta) - math.log(one_minus))

    def mgf(self, t: float) -> float:
        return math.exp(self.cgf(t))

    def pgf(self, s: float) -> float:
        """E[s^X] for |s| < 1/(1-theta)."""
        radius = 1.0 / (1.0 - self._theta)
        if abs(s) >= radius:
            raise DomainError(f"pgf requires |s| < 1/(1-theta) = {radius}, got {s}")
        one_minus = 1.0 - (1.0 - self._theta) * s
        return math.exp(self._log_mix(math.log(self._theta) - math.log(one_minus)))

    def cf(self, t: float) -> complex:
        """E[exp(itX)]."""
        base = self._theta / (1.0 - (1.0 - self._theta) * cmath.exp(1j * t))
        return complex(sum(w * base ** (k + 1) for k, w in self._components()))

    # --- order statistics ---------------------------------------------------------

    def min_cdf(self, x: int, n: int) -> float:
        """cdf of the minimum of n iid draws: 1 - (1 - F(x))^n."""
        if n < 1:
            raise DomainError(f"sample size must be >= 1, got {n}")
        if x < 0:
            return 0.0
        return 1.0 - self.survival(x + 1) ** n

    def max_cdf(self, x: int, n: int) -> float:
        """cdf of the maximum of n iid draws: F(x)^n."""
        if n < 1:
            raise DomainError(f"sample size must be >= 1, got {n}")
        return self.cdf(x) ** n


def stress_strength(strength: NdoppeDist, stress: NdoppeDist,
                    tail_mass: float = config.TRUNCATION_MASS, chunk: int = 512) -> float:
    """
    R = P(X <= Y) = sum_y F_X(y) p_Y(y) for stress X and strength Y.
    The sum stops once the remaining strength mass is below `tail_mass`, so R
    carries at most that much truncation error.
    """
    total = 0.0
    fx_prev = 0.0
    start = 0
    while True:
        ys = np.arange(start, start + chunk)
        fx = np.minimum(fx_prev + np.cumsum(stress.pmf(ys)), 1.0)
        total += float(np.dot(fx, strength.pmf(ys)))
        fx_prev = float(fx[-1])
        start += chunk
        if strength.survival(start) < tail_mass:
            break
    logger.debug(f"stress-strength sum truncated after {start} terms")
    return min(max(total, 0.0), 1.0)
