"""
Aggregate claim models S = X_1 + ... + X_N with exponential(gamma) claim sizes.

Each model is a mixed law: an atom P(S=0) = P(N=0) plus a continuous density
on x > 0. Closed forms are used for the atom, the density, the mgf and (where
available) the mean and variance; cdf, survival and stop-loss premiums come
from adaptive quadrature of the density.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from . import config
from .baselines import NegBinDist, PoissonDist
from .errors import DomainError, ParameterError, UnsupportedOperationError
from .ndoppe import CoefficientVector, NdoppeDist
from .specfun import log_bessel_i1, log_hyp1f1

logger = logging.getLogger("ndoppe_compound")

MODEL_KINDS = ("ndoppe", "poisson", "negbin", "dlindley", "dxgamma1", "dxgamma2")

# The quadrature is split at tail_bound(); past it the density is below e^-TAIL_DECAYS.
TAIL_DECAYS = 60.0


def _check_unit_interval(name: str, value: float):
    if not (0.0 < value < 1.0):
        raise ParameterError(f"{name} must satisfy 0 < {name} < 1, got {value}")


class CompoundModel(ABC):
    """Common interface of the aggregate claim models."""

    kind: str = ""

    def __init__(self, gamma: float):
        gamma = float(gamma)
        if not (math.isfinite(gamma) and gamma > 0):
            raise ParameterError(f"claim rate gamma must be > 0, got {gamma}")
        self.gamma = gamma

    # --- closed forms supplied by each model ---

    @abstractmethod
    def atom(self) -> float:
        """P(S = 0)."""

    @abstractmethod
    def density(self, x: float) -> float:
        """Continuous part of the law at x > 0."""

    @abstractmethod
    def density_at_zero_plus(self) -> float:
        """Limit of the density as x -> 0+."""

    @abstractmethod
    def decay_rate(self) -> float:
        """Exponential rate of the density tail."""

    @abstractmethod
    def mgf_radius(self) -> float:
        """The mgf exists for t below this value."""

    @abstractmethod
    def _mgf(self, t: float) -> float: ...

    @abstractmethod
    def params(self) -> Dict[str, float]: ...

    def mean(self) -> float:
        raise UnsupportedOperationError(f"the mean of the compound {self.kind} model is not available")

    def variance(self) -> float:
        raise UnsupportedOperationError(f"the variance of the compound {self.kind} model is not available")

    # --- shared machinery ---

    def pdf(self, x: float) -> float:
        """Atom at x = 0, density for x > 0."""
        if x < 0:
            raise DomainError(f"aggregate claim amount must be >= 0, got {x}")
        if x == 0:
            return self.atom()
        return self.density(x)

    def mgf(self, t: float) -> float:
        radius = self.mgf_radius()
        if t >= radius:
            raise DomainError(f"mgf of the compound {self.kind} model requires t < {radius}, got {t}")
        return self._mgf(t)

    def tail_bound(self) -> float:
        """Split point of the quadrature; beyond it only a negligible tail remains."""
        bound = TAIL_DECAYS / self.decay_rate()
        try:
            bound += self.mean() + 20.0 * math.sqrt(self.variance())
        except UnsupportedOperationError:
            pass
        return bound

    def _integrate(self, func, a: float, b: float = math.inf) -> float:
        opts = dict(epsabs=config.QUAD_EPSABS, epsrel=config.QUAD_EPSREL, limit=config.QUAD_LIMIT)
        split = self.tail_bound()
        pieces = []
        if a < split < b:
            pieces = [(a, split), (split, b)]
        elif a < b:
            pieces = [(a, b)]
        total = 0.0
        for lo, hi in pieces:
            value, err = integrate.quad(func, lo, hi, **opts)
            if err > 1e-8:
                logger.warning(f"{self.kind}: quadrature on [{lo:g}, {hi:g}] reports error {err:.2e}")
            total += value
        return total

    def continuous_mass(self) -> float:
        """Integral of the density over (0, inf); equals 1 - atom."""
        return self._integrate(self.density, 0.0)

    def cdf(self, x: float) -> float:
        if x < 0:
            return 0.0
        return min(self.atom() + self._integrate(self.density, 0.0, x), 1.0)

    def survival(self, x: float) -> float:
        """P(S > x)."""
        if x < 0:
            return 1.0
        return min(self._integrate(self.density, x), 1.0)

    def stop_loss_premium(self, retention: float) -> float:
        """E[(S - d)+] = integral over (d, inf) of (x - d) f(x)."""
        if retention < 0:
            raise DomainError(f"retention must be >= 0, got {retention}")
        return max(self._integrate(lambda x: (x - retention) * self.density(x), retention), 0.0)

    def __repr__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class NdoppeCompound(CompoundModel):
    """
    NDOPPE claim counts. For x > 0

        f(x) = gamma (1-theta) e^{-gamma x} sum_k a_k Gamma(k+2) 1F1(k+2; 2; gamma (1-theta) x) / D(theta)

    and the atom is sum_k a_k k! / D(theta).
    """

    kind = "ndoppe"

    def __init__(self, coeffs: Union[CoefficientVector, Iterable[float]], theta: float, gamma: float):
        super().__init__(gamma)
        self.primary = NdoppeDist(coeffs, theta)
        a = np.asarray(self.primary.coeffs.a)
        self._ks = [k for k in range(a.size) if a[k] > 0]
        self._log_terms = [math.log(a[k]) + float(gammaln(k + 2.0)) for k in self._ks]

    @property
    def theta(self) -> float:
        return self.primary.theta

    def params(self):
        return {"theta": self.theta, "gamma": self.gamma}

    def atom(self):
        return self.primary.pmf(0)

    def density(self, x):
        if x == 0:
            return self.density_at_zero_plus()
        theta_bar = 1.0 - self.theta
        z = self.gamma * theta_bar * x
        mix = logsumexp([lt + log_hyp1f1(k + 2.0, 2.0, z) for k, lt in zip(self._ks, self._log_terms)])
        log_f = math.log(self.gamma * theta_bar) - self.gamma * x + mix - self.primary.log_d
        return math.exp(log_f)

    def density_at_zero_plus(self):
        theta = self.theta
        k = np.arange(self.primary.r + 1)
        return float(self.gamma * (1.0 - theta)
                     * np.dot(self.primary.weights, (k + 1.0) * theta ** (k + 1.0)))

    def decay_rate(self):
        return self.gamma * self.theta

    def mgf_radius(self):
        return self.gamma * self.theta

    def _mgf(self, t):
        """sum_k a_k k! / [1 - thetabar (1 - t/gamma)^-1]^(k+1) / D(theta)."""
        shrink = 1.0 - t / self.gamma
        base = 1.0 - (1.0 - self.theta) / shrink
        w = self.primary.weights
        k = np.arange(w.size)
        positive = w > 0
        log_terms = np.log(w[positive]) + (k[positive] + 1.0) * (math.log(self.theta) - math.log(base))
        return float(math.exp(logsumexp(log_terms)))

    def _ratio_moments(self):
        theta = self.theta
        odds = (1.0 - theta) / theta
        k = np.arange(self.primary.r + 1, dtype=float)
        w = self.primary.weights
        m1 = odds * float(np.dot(w, k + 1.0))
        m2 = odds ** 2 * float(np.dot(w, (k + 1.0) * (k + 2.0)))
        return m1, m2

    def mean(self):
        m1, _ = self._ratio_moments()
        return m1 / self.gamma

    def variance(self):
        m1, m2 = self._ratio_moments()
        return (m2 - m1 * (m1 - 2.0)) / self.gamma ** 2


class PoissonCompound(CompoundModel):
    """Compound Poisson: sqrt(gamma alpha / x) I1(2 sqrt(gamma alpha x)) e^{-(alpha + gamma x)}."""

    kind = "poisson"

    def __init__(self, alpha: float, gamma: float):
        super().__init__(gamma)
        self.primary = PoissonDist(float(alpha))

    @property
    def alpha(self) -> float:
        return self.primary.alpha

    def params(self):
        return {"alpha": self.alpha, "gamma": self.gamma}

    def atom(self):
        return math.exp(-self.alpha)

    def density(self, x):
        if x == 0:
            return self.density_at_zero_plus()
        ga = self.gamma * self.alpha
        log_f = (0.5 * math.log(ga / x) + log_bessel_i1(2.0 * math.sqrt(ga * x))
                 - self.alpha - self.gamma * x)
        return math.exp(log_f)

    def density_at_zero_plus(self):
        return self.gamma * self.alpha * math.exp(-self.alpha)

    def decay_rate(self):
        return self.gamma

    def mgf_radius(self):
        return self.gamma

    def _mgf(self, t):
        return math.exp(self.alpha * (1.0 / (1.0 - t / self.gamma) - 1.0))

    def mean(self):
        return self.alpha / self.gamma

    def variance(self):
        return 2.0 * self.alpha / self.gamma ** 2


class NegBinCompound(CompoundModel):
    """Compound negative binomial: gamma r (1-p)^r p e^{-gamma x} 1F1(1+r; 2; gamma p x)."""

    kind = "negbin"

    def __init__(self, r: float, p: float, gamma: float):
        super().__init__(gamma)
        self.primary = NegBinDist(float(r), float(p))

    @property
    def r(self) -> float:
        return self.primary.r_param

    @property
    def p(self) -> float:
        return self.primary.p_fail

    def params(self):
        return {"r": self.r, "p": self.p, "gamma": self.gamma}

    def atom(self):
        return math.exp(self.r * math.log1p(-self.p))

    def density(self, x):
        if x == 0:
            return self.density_at_zero_plus()
        log_f = (math.log(self.gamma * self.r * self.p) + self.r * math.log1p(-self.p)
                 - self.gamma * x + log_hyp1f1(1.0 + self.r, 2.0, self.gamma * self.p * x))
        return math.exp(log_f)

    def density_at_zero_plus(self):
        return self.gamma * self.r * self.p * self.atom()

    def decay_rate(self):
        return self.gamma * (1.0 - self.p)

    def mgf_radius(self):
        return self.gamma * (1.0 - self.p)

    def _mgf(self, t):
        base = 1.0 - self.p / (1.0 - t / self.gamma)
        return math.exp(self.r * (math.log1p(-self.p) - math.log(base)))

    def mean(self):
        return self.r * self.p / (self.gamma * (1.0 - self.p))

    def variance(self):
        return self.r * self.p * (2.0 - self.p) / (self.gamma ** 2 * (1.0 - self.p) ** 2)


class ImpliedCountDist:
    """
    Claim-count law recovered from a polynomial-times-exponential compound
    density. Writing the density as gamma e^{-rho v} sum_j b_j v^j with v = gamma x
    and matching it against sum_n P(N=n) gamma e^{-v} v^(n-1)/(n-1)! gives

        P(N=n) = sum_j b_j (n-1)!/(n-1-j)! (1-rho)^(n-1-j),  n >= 1.
    """

    def __init__(self, atom: float, coeffs: List[float], rho: float):
        self.atom = atom
        self.coeffs = list(coeffs)
        self.rho = rho

    def _pmf_scalar(self, n: int) -> float:
        if n == 0:
            return self.atom
        q = 1.0 - self.rho
        total = 0.0
        for j, b in enumerate(self.coeffs):
            if j > n - 1:
                break
            total += b * math.exp(gammaln(n) - gammaln(n - j)) * q ** (n - 1 - j)
        return max(total, 0.0)

    def pmf(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=np.int64))
        out = np.array([self._pmf_scalar(int(n)) for n in arr])
        return float(out[0]) if np.ndim(x) == 0 else out

    def logpmf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pmf(x))

    def table(self, mass: float = 1e-14) -> np.ndarray:
        """pmf on 0..m where the remaining mass is below `mass`."""
        probs = [self.atom]
        covered = self.atom
        n = 1
        while 1.0 - covered > mass and n < 100_000:
            probs.append(self._pmf_scalar(n))
            covered += probs[-1]
            n += 1
        return np.array(probs)

    def mean(self) -> float:
        t = self.table()
        return float(np.dot(np.arange(t.size), t))

    def variance(self) -> float:
        t = self.table()
        n = np.arange(t.size)
        m = float(np.dot(n, t))
        return float(np.dot(n * n, t)) - m * m


class PolyExpCompound(CompoundModel):
    """Density gamma e^{-rho gamma x} sum_j b_j (gamma x)^j for x > 0."""

    def _poly(self) -> Tuple[List[float], float]:
        """(b_0..b_m, rho)"""
        raise NotImplementedError

    @property
    def primary(self) -> ImpliedCountDist:
        coeffs, rho = self._poly()
        return ImpliedCountDist(self.atom(), coeffs, rho)

    def density(self, x):
        coeffs, rho = self._poly()
        v = self.gamma * x
        poly = sum(b * v ** j for j, b in enumerate(coeffs))
        return max(self.gamma * poly * math.exp(-rho * v), 0.0)

    def density_at_zero_plus(self):
        coeffs, _ = self._poly()
        return self.gamma * coeffs[0]

    def decay_rate(self):
        _, rho = self._poly()
        return self.gamma * rho

    def mgf_radius(self):
        return self.decay_rate()

    def _mgf(self, t):
        """Laplace transform of each term: b_j j! / (rho - t/gamma)^(j+1)."""
        coeffs, rho = self._poly()
        s = rho - t / self.gamma
        return self.atom() + sum(b * math.factorial(j) / s ** (j + 1) for j, b in enumerate(coeffs))


class DLindleyCompound(PolyExpCompound):
    """
    Discrete Lindley claim counts, with L = ln(lambda):

        f(x) = gamma lambda [(1-lambda) + (3 lambda - 2) L - gamma lambda (1-lambda) L x]
               e^{-gamma (1-lambda) x} / (1 - L)
    """

    kind = "dlindley"

    def __init__(self, lam: float, gamma: float):
        super().__init__(gamma)
        lam = float(lam)
        _check_unit_interval("lambda", lam)
        self.lam = lam

    def params(self):
        return {"lambda": self.lam, "gamma": self.gamma}

    def _poly(self):
        lam, L = self.lam, math.log(self.lam)
        scale = lam / (1.0 - L)
        return [scale * ((1.0 - lam) + (3.0 * lam - 2.0) * L),
                -scale * lam * (1.0 - lam) * L], 1.0 - lam

    def atom(self):
        lam, L = self.lam, math.log(self.lam)
        return (1.0 - lam + (2.0 * lam - 1.0) * L) / (1.0 - L)

    def mean(self):
        lam, L = self.lam, math.log(self.lam)
        return lam * (1.0 - lam + (lam - 2.0) * L) / (self.gamma * (1.0 - lam) ** 2 * (1.0 - L))

    def variance(self):
        lam, L = self.lam, math.log(self.lam)
        bracket = ((1.0 - lam) ** 2 * (1.0 - L) * (1.0 - lam + (lam - 2.0) * L)
                   + (1.0 - lam) ** 2 - (3.0 - 4.0 * lam + lam ** 2) * L + (2.0 - 3.0 * lam) * L ** 2)
        return lam * bracket / (self.gamma ** 2 * (1.0 - lam) ** 4 * (1.0 - L) ** 2)


class DxGammaICompound(PolyExpCompound):
    """
    Discrete xgamma-I claim counts, with L = ln(p) and u = gamma p x:

        f(x) = gamma p / (1-L) [(1-p) - (2-3p) L + (1-4p) L^2 / 2
               + L (p - 1 + (3-5p) L / 2) u + (1-p) L^2 u^2 / 2] e^{-gamma (1-p) x}

    The leading (1-p) makes atom + integral of the density equal 1.
    """

    kind = "dxgamma1"

    def __init__(self, p: float, gamma: float):
        super().__init__(gamma)
        p = float(p)
        _check_unit_interval("p", p)
        self.p = p

    def params(self):
        return {"p": self.p, "gamma": self.gamma}

    def _poly(self):
        p, L = self.p, math.log(self.p)
        scale = p / (1.0 - L)
        c0 = (1.0 - p) - (2.0 - 3.0 * p) * L + (1.0 - 4.0 * p) * L ** 2 / 2.0
        c1 = L * (p - 1.0 + (3.0 - 5.0 * p) * L / 2.0)
        c2 = (1.0 - p) * L ** 2 / 2.0
        return [scale * c0, scale * c1 * p, scale * c2 * p ** 2], 1.0 - p

    def atom(self):
        p, L = self.p, math.log(self.p)
        return (1.0 - L - p * (1.0 - 2.0 * L + L ** 2 / 2.0)) / (1.0 - L)


class DxGammaIICompound(PolyExpCompound):
    """
    Discrete xgamma-II claim counts, with L = ln(p), u = gamma p x and
    K = 2(1-p)^3 / (2(1-p)^2 - p(1+p) L):

        f(x) = K gamma p [1 - L/2 - (3L/2) u - (L/2) u^2] e^{-gamma (1-p) x},  atom K.
    """

    kind = "dxgamma2"

    def __init__(self, p: float, gamma: float):
        super().__init__(gamma)
        p = float(p)
        _check_unit_interval("p", p)
        self.p = p

    def params(self):
        return {"p": self.p, "gamma": self.gamma}

    def _poly(self):
        p, L = self.p, math.log(self.p)
        scale = self.atom() * p
        return [scale * (1.0 - L / 2.0), -scale * 1.5 * L * p, -scale * 0.5 * L * p ** 2], 1.0 - p

    def atom(self):
        p, L = self.p, math.log(self.p)
        return 2.0 * (1.0 - p) ** 3 / (2.0 * (1.0 - p) ** 2 - p * (1.0 + p) * L)


def make_model(kind: str, gamma: float, coeffs: Optional[Iterable[float]] = None,
               theta: Optional[float] = None, alpha: Optional[float] = None,
               r: Optional[float] = None, p: Optional[float] = None,
               lam: Optional[float] = None) -> CompoundModel:
    """Build a compound model from a kind tag and its named parameters."""

    def need(name, value):
        if value is None:
            raise ParameterError(f"compound {kind} model needs --{name}")
        return value

    if kind == "ndoppe":
        return NdoppeCompound(need("coeffs", coeffs), need("theta", theta), gamma)
    if kind == "poisson":
        return PoissonCompound(need("alpha", alpha), gamma)
    if kind == "negbin":
        return NegBinCompound(need("r", r), need("p", p), gamma)
    if kind == "dlindley":
        return DLindleyCompound(need("lambda", lam), gamma)
    if kind == "dxgamma1":
        return DxGammaICompound(need("p", p), gamma)
    if kind == "dxgamma2":
        return DxGammaIICompound(need("p", p), gamma)
    raise ParameterError(f"unknown compound model {kind!r}; choose from {', '.join(MODEL_KINDS)}")


# --- operation-level entry points --------------------------------------------

def _expect(m: CompoundModel, cls):
    if not isinstance(m, cls):
        raise ParameterError(f"expected a {cls.__name__}, got {type(m).__name__}")


def compound_ndoppe_pdf(m: NdoppeCompound, x: float) -> float:
    _expect(m, NdoppeCompound)
    return m.pdf(x)


def compound_ndoppe_mean(m: NdoppeCompound) -> float:
    _expect(m, NdoppeCompound)
    return m.mean()


def compound_ndoppe_var(m: NdoppeCompound) -> float:
    _expect(m, NdoppeCompound)
    return m.variance()


def compound_ndoppe_mgf(m: NdoppeCompound, t: float) -> float:
    _expect(m, NdoppeCompound)
    return m.mgf(t)


def compound_poisson_pdf(m: PoissonCompound, x: float) -> float:
    _expect(m, PoissonCompound)
    return m.pdf(x)


def compound_negbin_pdf(m: NegBinCompound, x: float) -> float:
    _expect(m, NegBinCompound)
    return m.pdf(x)


def compound_dlindley_pdf(m: DLindleyCompound, x: float) -> float:
    _expect(m, DLindleyCompound)
    return m.pdf(x)


def compound_dxgamma1_pdf(m: DxGammaICompound, x: float) -> float:
    _expect(m, DxGammaICompound)
    return m.pdf(x)


def compound_dxgamma2_pdf(m: DxGammaIICompound, x: float) -> float:
    _expect(m, DxGammaIICompound)
    return m.pdf(x)


def stop_loss_premium(m: CompoundModel, retention: float) -> float:
    return m.stop_loss_premium(retention)
