"""
Special-function kernel: log-gamma, the regularized incomplete beta function,
Kummer's confluent hypergeometric function 1F1 and the modified Bessel
function I1, each with a log-scaled companion where the value can overflow.

Accuracy: the kernels iterate to Accuracy.rel_tol (1e-12 by default) and the
public functions guarantee 1e-10 relative error on the argument ranges used
by the distribution, fitting and compound modules.

Schemes:
    reg_inc_beta   modified Lentz continued fraction, with the symmetry
                   I_p(m, n) = 1 - I_{1-p}(n, m) past p = (m+1)/(m+n+2).
    log_hyp1f1     a - b a nonnegative integer: Kummer's transformation to a
                   terminating positive polynomial times e^z (exact for every
                   compound density with integer shape);
                   z > ASYMPTOTIC_SWITCH: large-z asymptotic expansion, used
                   only if its terms reach rel_tol before they start growing;
                   otherwise the power series, summed in log space.
    bessel_i1      power series (direct for the value, log space for the
                   log-scaled variant); log_bessel_i1 switches to the
                   Hankel expansion past ASYMPTOTIC_SWITCH.
"""

import logging
import math
from dataclasses import dataclass

from scipy.special import gammaln

from . import config
from .accel import jit
from .errors import ConvergenceError, DomainError, ParameterError, SeriesOverflowError

logger = logging.getLogger("ndoppe_specfun")

ASYMPTOTIC_SWITCH = 50.0
LOG_FLOAT_MAX = math.log(1.7976931348623157e308)
_TINY = 1e-300


@dataclass(frozen=True)
class Accuracy:
    """Relative error target and series cap shared by the kernels."""
    rel_tol: float = config.REL_TOL
    max_terms: int = config.MAX_TERMS

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ParameterError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ParameterError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_ACCURACY = Accuracy()


# ---------------------------------------------------------------------------
# Scalar kernels (numba-compatible: math only, no exceptions)
# ---------------------------------------------------------------------------

@jit
def _logaddexp(x, y):
    if x == -math.inf:
        return y
    if y == -math.inf:
        return x
    if x > y:
        return x + math.log1p(math.exp(y - x))
    return y + math.log1p(math.exp(x - y))


@jit
def _betacf(a, b, x, rel_tol, max_terms):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_terms + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < rel_tol:
            return h, True
    return h, False


@jit
def _log_hyp1f1_series(a, b, z, rel_tol, max_terms):
    # Positive terms; rho bounds every later term ratio, so the tail after the
    # current term is at most term * rho / (1 - rho).
    log_term = 0.0
    log_sum = 0.0
    lz = math.log(z)
    log_tol = math.log(rel_tol)
    for j in range(max_terms):
        rho = z * max(1.0, (a + j) / (b + j)) / (j + 1)
        if rho < 1.0:
            if log_term + math.log(rho / (1.0 - rho)) <= log_sum + log_tol:
                return log_sum, True
        log_term += math.log(a + j) + lz - math.log(b + j) - math.log(j + 1.0)
        log_sum = _logaddexp(log_sum, log_term)
    return log_sum, False


@jit
def _log_kummer_polynomial(n, b, z):
    # log of 1F1(-n; b; -z) = sum_j n!/(n-j)! z^j / ((b)_j j!), n >= 0 integer
    log_sum = 0.0
    log_term = 0.0
    lz = math.log(z)
    for j in range(n):
        log_term += math.log(float(n - j)) + lz - math.log(b + j) - math.log(j + 1.0)
        log_sum = _logaddexp(log_sum, log_term)
    return log_sum


@jit
def _hyp1f1_asymptotic_sum(a, b, z, rel_tol, max_terms):
    total = 1.0
    term = 1.0
    prev = 1.0
    for s in range(1, max_terms):
        term *= (b - a + s - 1.0) * (s - a) / (s * z)
        total += term
        if abs(term) <= rel_tol * abs(total):
            return total, True
        if abs(term) > prev:
            return total, False
        prev = abs(term)
    return total, False


@jit
def _bessel_i1_series(z, rel_tol, max_terms):
    q = 0.25 * z * z
    term = 0.5 * z
    total = term
    for k in range(max_terms):
        rho = q / ((k + 1.0) * (k + 2.0))
        if rho < 1.0 and term * rho / (1.0 - rho) <= rel_tol * total:
            return total, True
        term *= rho
        total += term
    return total, False


@jit
def _bessel_i1_asymptotic_sum(z, rel_tol, max_terms):
    # I1(z) ~ e^z / sqrt(2 pi z) * sum_k (-1)^k prod_{i<=k} (4 - (2i-1)^2) / (k! (8z)^k)
    total = 1.0
    term = 1.0
    prev = 1.0
    for k in range(1, max_terms):
        odd = 2.0 * k - 1.0
        term *= -(4.0 - odd * odd) / (k * 8.0 * z)
        total += term
        if abs(term) <= rel_tol * abs(total):
            return total, True
        if abs(term) > prev:
            return total, False
        prev = abs(term)
    return total, False


@jit
def _log_bessel_i1_series(z, rel_tol, max_terms):
    lq = 2.0 * math.log(0.5 * z)
    log_term = math.log(0.5 * z)
    log_sum = log_term
    log_tol = math.log(rel_tol)
    for k in range(max_terms):
        rho = 0.25 * z * z / ((k + 1.0) * (k + 2.0))
        if rho < 1.0:
            if log_term + math.log(rho / (1.0 - rho)) <= log_sum + log_tol:
                return log_sum, True
        log_term += lq - math.log(k + 1.0) - math.log(k + 2.0)
        log_sum = _logaddexp(log_sum, log_term)
    return log_sum, False


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def _as_real(name: str, value) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {value}")
    return v


def log_gamma(x) -> float:
    """ln Gamma(x) for x > 0."""
    x = _as_real("x", x)
    if x <= 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return float(gammaln(x))


def reg_inc_beta(p, m, n, accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """
    Regularized incomplete beta function I_p(m, n).
    Nondecreasing in p with I_0 = 0 and I_1 = 1.
    """
    p = _as_real("p", p)
    m = _as_real("m", m)
    n = _as_real("n", n)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"reg_inc_beta requires 0 <= p <= 1, got p={p}")
    if m <= 0 or n <= 0:
        raise DomainError(f"reg_inc_beta requires m > 0 and n > 0, got m={m}, n={n}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0

    log_front = (gammaln(m + n) - gammaln(m) - gammaln(n)
                 + m * math.log(p) + n * math.log1p(-p))
    if p < (m + 1.0) / (m + n + 2.0):
        cf, ok = _betacf(m, n, p, accuracy.rel_tol, accuracy.max_terms)
        value = math.exp(log_front) * cf / m
    else:
        cf, ok = _betacf(n, m, 1.0 - p, accuracy.rel_tol, accuracy.max_terms)
        value = 1.0 - math.exp(log_front) * cf / n
    if not ok:
        raise ConvergenceError(
            f"incomplete beta continued fraction did not converge in "
            f"{accuracy.max_terms} terms (p={p}, m={m}, n={n})")
    return min(max(value, 0.0), 1.0)


def _check_hyp1f1_args(a, b, z):
    a = _as_real("a", a)
    b = _as_real("b", b)
    z = _as_real("z", z)
    if a <= 0 or b <= 0:
        raise DomainError(f"hyp1f1 requires a > 0 and b > 0, got a={a}, b={b}")
    if z < 0:
        raise DomainError(f"hyp1f1 is only defined here for z >= 0, got z={z}")
    return a, b, z


def _terminating_degree(a: float, b: float):
    """a - b when it is a nonnegative integer, else None."""
    diff = a - b
    n = round(diff)
    if n >= 0 and abs(diff - n) <= 1e-12 * max(1.0, abs(a)):
        return int(n)
    return None


def log_hyp1f1(a, b, z, accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """ln 1F1(a; b; z) for a, b > 0 and z >= 0."""
    a, b, z = _check_hyp1f1_args(a, b, z)
    if z == 0.0:
        return 0.0

    n = _terminating_degree(a, b)
    if n is not None:
        return z + _log_kummer_polynomial(n, b, z)

    if z > ASYMPTOTIC_SWITCH:
        total, ok = _hyp1f1_asymptotic_sum(a, b, z, accuracy.rel_tol, accuracy.max_terms)
        if ok and total > 0:
            return float(gammaln(b) - gammaln(a) + z + (a - b) * math.log(z) + math.log(total))
        logger.debug(f"1F1 asymptotic expansion rejected at a={a}, b={b}, z={z}; using series")

    value, ok = _log_hyp1f1_series(a, b, z, accuracy.rel_tol, accuracy.max_terms)
    if not ok:
        raise ConvergenceError(
            f"1F1 series did not converge in {accuracy.max_terms} terms (a={a}, b={b}, z={z})")
    return value


def hyp1f1(a, b, z, accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """Kummer's function 1F1(a; b; z) = sum (a)_j z^j / ((b)_j j!)."""
    log_value = log_hyp1f1(a, b, z, accuracy)
    if log_value > LOG_FLOAT_MAX:
        raise SeriesOverflowError(
            f"1F1({a}; {b}; {z}) exceeds the float range; use log_hyp1f1 (= {log_value})")
    return math.exp(log_value)


def log_bessel_i1(z, accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """ln I1(z) for z >= 0 (-inf at z = 0)."""
    z = _as_real("z", z)
    if z < 0:
        raise DomainError(f"bessel_i1 requires z >= 0, got {z}")
    if z == 0.0:
        return -math.inf
    if z > ASYMPTOTIC_SWITCH:
        total, ok = _bessel_i1_asymptotic_sum(z, accuracy.rel_tol, accuracy.max_terms)
        if ok and total > 0:
            return z - 0.5 * math.log(2.0 * math.pi * z) + math.log(total)
    value, ok = _log_bessel_i1_series(z, accuracy.rel_tol, accuracy.max_terms)
    if not ok:
        raise ConvergenceError(f"I1 series did not converge in {accuracy.max_terms} terms (z={z})")
    return value


def bessel_i1(z, accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """Modified Bessel function of the first kind, order one."""
    z = _as_real("z", z)
    if z < 0:
        raise DomainError(f"bessel_i1 requires z >= 0, got {z}")
    if z == 0.0:
        return 0.0
    value, ok = _bessel_i1_series(z, accuracy.rel_tol, accuracy.max_terms)
    if math.isinf(value):
        raise SeriesOverflowError(f"I1({z}) exceeds the float range; use log_bessel_i1")
    if not ok:
        raise ConvergenceError(f"I1 series did not converge in {accuracy.max_terms} terms (z={z})")
    return value
