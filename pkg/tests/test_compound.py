"""
Tests for the aggregate claim models: normalization, closed-form moments and
mgfs against quadrature, implied claim-count laws and stop-loss premiums.
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from ndoppe.compound import (
    MODEL_KINDS,
    DLindleyCompound,
    DxGammaICompound,
    DxGammaIICompound,
    NdoppeCompound,
    NegBinCompound,
    PoissonCompound,
    compound_dlindley_pdf,
    compound_dxgamma1_pdf,
    compound_dxgamma2_pdf,
    compound_ndoppe_mean,
    compound_ndoppe_mgf,
    compound_ndoppe_pdf,
    compound_ndoppe_var,
    compound_negbin_pdf,
    compound_poisson_pdf,
    make_model,
    stop_loss_premium,
)
from ndoppe.errors import DomainError, ParameterError, UnsupportedOperationError
from ndoppe.simulate import SimConfig, sample_aggregate


@pytest.fixture
def random_model(rng):
    """Factory for a random compound model of the given kind."""

    def make(kind):
        gamma = float(rng.uniform(0.5, 3.0))
        if kind == "ndoppe":
            r = int(rng.integers(0, 7))
            a = (rng.uniform(0.0, 2.0, size=r + 1) + 0.05).tolist()
            return NdoppeCompound(a, float(rng.uniform(0.1, 0.9)), gamma)
        if kind == "poisson":
            return PoissonCompound(float(rng.uniform(0.1, 5.0)), gamma)
        if kind == "negbin":
            return NegBinCompound(float(rng.uniform(0.3, 5.0)), float(rng.uniform(0.05, 0.8)), gamma)
        if kind == "dlindley":
            return DLindleyCompound(float(rng.uniform(0.05, 0.95)), gamma)
        if kind == "dxgamma1":
            return DxGammaICompound(float(rng.uniform(0.05, 0.95)), gamma)
        return DxGammaIICompound(float(rng.uniform(0.05, 0.95)), gamma)

    return make


def _count_moments(m):
    """(E N, Var N) of the claim-count law behind a model."""
    return m.primary.mean(), m.primary.variance()


def _numeric_mgf(m, t):
    bound = 2.0 * m.tail_bound()
    f = lambda x: math.exp(t * x) * m.density(x)
    head, _ = integrate.quad(f, 0.0, bound, limit=400, epsabs=1e-13, epsrel=1e-11)
    tail, _ = integrate.quad(f, bound, math.inf, limit=400)
    return m.atom() + head + tail


class TestNormalization:
    """Atom plus continuous mass is one"""

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_total_mass(self, kind, random_model):
        """50 random models per kind integrate to 1 within 1e-8"""
        for _ in range(50):
            m = random_model(kind)
            assert m.atom() + m.continuous_mass() == pytest.approx(1.0, abs=1e-8), repr(m)

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_cdf_and_survival(self, kind, random_model):
        """cdf(x) + P(S > x) = 1 and the cdf starts at the atom"""
        m = random_model(kind)
        assert m.cdf(0.0) == pytest.approx(m.atom(), abs=1e-14)
        for x in (0.3, 1.0, 4.0):
            assert m.cdf(x) + m.survival(x) == pytest.approx(1.0, abs=1e-8)
        assert m.cdf(-1.0) == 0.0

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_zero_plus_limit(self, kind, random_model):
        """The density tends to its closed-form limit at 0+"""
        m = random_model(kind)
        assert m.density(1e-9) == pytest.approx(m.density_at_zero_plus(), rel=1e-6)


class TestNdoppeCompound:
    """Compound NDOPPE with exponential claims"""

    def test_geometric_reduction(self):
        """a = [1]: atom theta and density gamma theta (1-theta) e^{-gamma theta x}"""
        theta, gamma = 0.35, 1.7
        m = NdoppeCompound([1.0], theta, gamma)
        assert m.pdf(0.0) == pytest.approx(theta, rel=1e-14)
        for x in (0.1, 1.0, 10.0, 300.0):
            expected = gamma * theta * (1 - theta) * math.exp(-gamma * theta * x)
            assert compound_ndoppe_pdf(m, x) == pytest.approx(expected, rel=1e-11)

    def test_matches_gamma_mixture(self):
        """The closed form equals sum_n P(N=n) Gamma(n, gamma) density"""
        m = NdoppeCompound([1.0, 0.5, 2.0], 0.4, 1.3)
        ns = np.arange(1, 400)
        pn = m.primary.pmf(ns)
        for x in (0.05, 0.7, 3.0, 12.0):
            expected = float(np.sum(pn * stats.gamma.pdf(x, ns, scale=1 / m.gamma)))
            assert m.density(x) == pytest.approx(expected, rel=1e-10)

    def test_moments_from_counts(self, random_model):
        """E S = E N / gamma and Var S = (E N + Var N) / gamma^2"""
        for _ in range(20):
            m = random_model("ndoppe")
            en, vn = _count_moments(m)
            assert compound_ndoppe_mean(m) == pytest.approx(en / m.gamma, rel=1e-12)
            assert compound_ndoppe_var(m) == pytest.approx((en + vn) / m.gamma ** 2, rel=1e-10)

    def test_mgf_composition(self, random_model):
        """M_S(t) = G_N(gamma / (gamma - t))"""
        for _ in range(20):
            m = random_model("ndoppe")
            t = 0.5 * m.mgf_radius()
            expected = m.primary.pgf(m.gamma / (m.gamma - t))
            assert compound_ndoppe_mgf(m, t) == pytest.approx(expected, rel=1e-12)

    def test_scaling(self):
        """f_gamma(x) = gamma f_1(gamma x)"""
        a, theta, gamma = [1.0, 1.0, 0.3], 0.5, 2.5
        unit, scaled = NdoppeCompound(a, theta, 1.0), NdoppeCompound(a, theta, gamma)
        for x in (0.2, 1.0, 5.0):
            assert scaled.density(x) == pytest.approx(gamma * unit.density(gamma * x), rel=1e-12)

    def test_continuity(self, random_model):
        """Neighbouring grid points differ by at most the local slope bound"""
        for _ in range(10):
            m = random_model("ndoppe")
            xs = np.linspace(1e-6, 10.0, 2001)
            f = np.array([m.density(x) for x in xs])
            steps = np.abs(np.diff(f))
            # a smooth density moves by O(h) between points h apart
            assert steps.max() <= 50.0 * (xs[1] - xs[0]) * max(f.max(), m.gamma * f.max())

    def test_far_tail_is_finite(self):
        """The density stays finite where 1F1 itself would overflow"""
        m = NdoppeCompound([1.0, 1.0], 0.05, 1.0)
        value = m.density(1000.0)
        assert 0.0 <= value < 1e-15


class TestPoissonCompound:
    """Compound Poisson with exponential claims"""

    def test_matches_gamma_mixture(self):
        """The Bessel form equals the Poisson mixture of gamma densities"""
        m = PoissonCompound(2.3, 0.8)
        ns = np.arange(1, 200)
        pn = stats.poisson.pmf(ns, m.alpha)
        for x in (0.01, 1.0, 6.0, 30.0):
            expected = float(np.sum(pn * stats.gamma.pdf(x, ns, scale=1 / m.gamma)))
            assert compound_poisson_pdf(m, x) == pytest.approx(expected, rel=1e-10)

    def test_moments(self):
        """Mean alpha/gamma and variance 2 alpha/gamma^2"""
        m = PoissonCompound(3.0, 2.0)
        assert m.mean() == pytest.approx(1.5)
        assert m.variance() == pytest.approx(1.5)
        assert m.atom() == pytest.approx(math.exp(-3.0))

    def test_large_argument(self):
        """Densities far out use the log-scaled Bessel function"""
        m = PoissonCompound(400.0, 1.0)
        assert math.isfinite(m.density(400.0))
        assert m.density(400.0) > 0.0


class TestNegBinCompound:
    """Compound negative binomial with exponential claims"""

    def test_matches_gamma_mixture(self):
        """The 1F1 form equals the NB mixture of gamma densities"""
        m = NegBinCompound(2.7, 0.45, 1.1)
        ns = np.arange(1, 300)
        pn = stats.nbinom.pmf(ns, m.r, 1.0 - m.p)
        for x in (0.02, 1.0, 8.0, 25.0):
            expected = float(np.sum(pn * stats.gamma.pdf(x, ns, scale=1 / m.gamma)))
            assert compound_negbin_pdf(m, x) == pytest.approx(expected, rel=1e-10)

    def test_r_one_is_compound_geometric(self):
        """r = 1 coincides with the compound NDOPPE geometric case"""
        p, gamma = 0.6, 1.4
        nb, geo = NegBinCompound(1.0, p, gamma), NdoppeCompound([1.0], 1.0 - p, gamma)
        assert nb.atom() == pytest.approx(geo.atom(), rel=1e-14)
        for x in (0.1, 2.0, 20.0):
            assert nb.density(x) == pytest.approx(geo.density(x), rel=1e-11)

    def test_moments_from_counts(self):
        """E S and Var S follow from the count moments"""
        m = NegBinCompound(1.8, 0.3, 0.9)
        en, vn = _count_moments(m)
        assert m.mean() == pytest.approx(en / m.gamma, rel=1e-13)
        assert m.variance() == pytest.approx((en + vn) / m.gamma ** 2, rel=1e-13)


class TestPolyExpCompounds:
    """Discrete Lindley and discrete xgamma claim counts"""

    def test_implied_counts_are_discrete_lindley(self):
        """Recovered P(N=n) is the discrete Lindley mass function"""
        lam = 0.4
        L = math.log(lam)
        m = DLindleyCompound(lam, 1.0)
        for n in range(30):
            expected = lam ** n * (lam * L + (1 - lam) * (1 - (n + 1) * L)) / (1 - L)
            assert m.primary.pmf(n) == pytest.approx(expected, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("cls", [DLindleyCompound, DxGammaICompound, DxGammaIICompound])
    def test_implied_counts_form_a_law(self, cls):
        """The recovered count probabilities are nonnegative and sum to one"""
        for q in (0.1, 0.5, 0.9):
            table = cls(q, 1.0).primary.table()
            assert np.all(table >= 0.0)
            assert float(table.sum()) == pytest.approx(1.0, abs=1e-12)

    def test_dlindley_moments(self):
        """Closed-form mean and variance agree with the implied counts"""
        for lam in (0.15, 0.5, 0.85):
            m = DLindleyCompound(lam, 1.7)
            en, vn = _count_moments(m)
            assert m.mean() == pytest.approx(en / m.gamma, rel=1e-10)
            assert m.variance() == pytest.approx((en + vn) / m.gamma ** 2, rel=1e-9)

    @pytest.mark.parametrize("cls", [DLindleyCompound, DxGammaICompound, DxGammaIICompound])
    def test_mgf_matches_count_composition(self, cls):
        """The Laplace-transform mgf equals sum_n P(N=n) (gamma/(gamma-t))^n"""
        m = cls(0.45, 1.2)
        t = 0.25 * m.mgf_radius()
        table = m.primary.table()
        n = np.arange(table.size)
        expected = float(np.sum(table * (m.gamma / (m.gamma - t)) ** n))
        assert m.mgf(t) == pytest.approx(expected, rel=1e-9)

    def test_entry_points(self):
        """Per-model pdf functions return the atom at zero"""
        d1, d2, dl = DxGammaICompound(0.3, 1.0), DxGammaIICompound(0.3, 1.0), DLindleyCompound(0.3, 1.0)
        assert compound_dxgamma1_pdf(d1, 0.0) == d1.atom()
        assert compound_dxgamma2_pdf(d2, 0.0) == d2.atom()
        assert compound_dlindley_pdf(dl, 0.0) == dl.atom()
        assert compound_dxgamma1_pdf(d1, 1.0) > 0.0

    @pytest.mark.parametrize("cls", [DxGammaICompound, DxGammaIICompound])
    def test_moments_unavailable(self, cls):
        """The xgamma models publish no mean or variance"""
        m = cls(0.5, 1.0)
        with pytest.raises(UnsupportedOperationError):
            m.mean()
        with pytest.raises(UnsupportedOperationError):
            m.variance()


class TestMgf:
    """Closed-form mgfs against quadrature of the law"""

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_matches_quadrature(self, kind, random_model):
        """atom + integral of e^{tx} f(x) at half the radius"""
        for _ in range(5):
            m = random_model(kind)
            t = 0.5 * m.mgf_radius()
            assert m.mgf(t) == pytest.approx(_numeric_mgf(m, t), rel=1e-7)

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_at_origin(self, kind, random_model):
        """M(0) = 1"""
        assert random_model(kind).mgf(0.0) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("kind", ["ndoppe", "poisson", "negbin", "dlindley"])
    def test_slope_is_mean(self, kind, random_model):
        """M'(0) = E S"""
        m = random_model(kind)
        h = 1e-5 * m.mgf_radius()
        slope = (m.mgf(h) - m.mgf(-h)) / (2 * h)
        assert slope == pytest.approx(m.mean(), rel=1e-6)

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_radius(self, kind, random_model):
        """t at or beyond the radius is rejected"""
        m = random_model(kind)
        with pytest.raises(DomainError):
            m.mgf(m.mgf_radius())


class TestStopLoss:
    """E[(S - d)+]"""

    @pytest.mark.parametrize("kind", ["ndoppe", "poisson", "negbin", "dlindley"])
    def test_zero_retention_is_mean(self, kind, random_model):
        """d = 0 gives E S"""
        m = random_model(kind)
        assert stop_loss_premium(m, 0.0) == pytest.approx(m.mean(), rel=1e-8)

    def test_decreasing(self):
        """Premiums fall as the retention rises and vanish far out"""
        m = NdoppeCompound([1.0, 1.0], 0.3, 1.0)
        values = [m.stop_loss_premium(d) for d in (0.0, 1.0, 5.0, 20.0)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert m.stop_loss_premium(4.0 * m.tail_bound()) < 1e-12

    def test_xgamma_premium(self):
        """Premiums exist even without a closed-form mean"""
        m = DxGammaIICompound(0.6, 1.0)
        assert m.stop_loss_premium(0.0) > m.stop_loss_premium(2.0) > 0.0

    def test_negative_retention(self):
        """d < 0 is rejected"""
        with pytest.raises(DomainError):
            stop_loss_premium(PoissonCompound(1.0, 1.0), -1.0)

    @pytest.mark.slow
    def test_monte_carlo(self):
        """Simulated premium within four standard errors"""
        m = NdoppeCompound([1.0, 1.0], 0.4, 1.5)
        d = 1.0
        sample = sample_aggregate(m, SimConfig(seed=11, replicates=200_000))
        excess = np.maximum(sample - d, 0.0)
        se = excess.std(ddof=1) / math.sqrt(excess.size)
        assert abs(excess.mean() - m.stop_loss_premium(d)) < 4 * se


class TestConstruction:
    """Parameter validation and the kind factory"""

    def test_make_model(self):
        """Each kind builds its class"""
        assert isinstance(make_model("ndoppe", 1.0, coeffs=[1, 1], theta=0.5), NdoppeCompound)
        assert isinstance(make_model("poisson", 1.0, alpha=2.0), PoissonCompound)
        assert isinstance(make_model("negbin", 1.0, r=2.0, p=0.4), NegBinCompound)
        assert isinstance(make_model("dlindley", 1.0, lam=0.4), DLindleyCompound)
        assert isinstance(make_model("dxgamma1", 1.0, p=0.4), DxGammaICompound)
        assert isinstance(make_model("dxgamma2", 1.0, p=0.4), DxGammaIICompound)

    def test_missing_parameter(self):
        """A kind without its parameter is rejected"""
        with pytest.raises(ParameterError):
            make_model("ndoppe", 1.0, coeffs=[1.0])
        with pytest.raises(ParameterError):
            make_model("weibull", 1.0)

    @pytest.mark.parametrize("gamma", [0.0, -1.0, float("nan")])
    def test_gamma(self, gamma):
        """gamma must be positive"""
        with pytest.raises(ParameterError):
            PoissonCompound(1.0, gamma)

    @pytest.mark.parametrize("cls", [DLindleyCompound, DxGammaICompound, DxGammaIICompound])
    def test_unit_interval(self, cls):
        """lambda and p lie strictly inside (0, 1)"""
        for bad in (0.0, 1.0):
            with pytest.raises(ParameterError):
                cls(bad, 1.0)

    def test_negative_amount(self):
        """pdf needs x >= 0"""
        with pytest.raises(DomainError):
            PoissonCompound(1.0, 1.0).pdf(-0.5)

    def test_entry_point_type_check(self):
        """The per-model entry points refuse other models"""
        with pytest.raises(ParameterError):
            compound_ndoppe_pdf(PoissonCompound(1.0, 1.0), 1.0)
