"""Distribution families: log pmfs/densities, MGF machinery, samplers."""

import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.special import gammaln

from freqsev.families import (
    Binomial,
    Gamma,
    InverseGaussian,
    Normal,
    Poisson,
    ZeroInflatedPoisson,
)

COUNT_CASES = [
    (Poisson(), 0.5),
    (Poisson(), 3.0),
    (ZeroInflatedPoisson(0.2), 1.0),
    (ZeroInflatedPoisson(0.35), 4.0),
    (Binomial(m=10), 3.0),
]


class TestCountLogPmf:
    def test_poisson_at_zero(self):
        # P(N=0) = exp(-1)
        assert Poisson().log_pmf(1.0, 0) == pytest.approx(-1.0, abs=1e-12)

    def test_zip_zero_branch(self):
        expected = math.log(0.2 + 0.8 * math.exp(-1.0))
        assert ZeroInflatedPoisson(0.2).log_pmf(1.0, 0) == pytest.approx(expected, abs=1e-12)

    def test_zip_positive_branch(self):
        # (1-pi) e^{-1} 1^2 / 2!
        expected = math.log(0.8 * math.exp(-1.0) / 2.0)
        assert ZeroInflatedPoisson(0.2).log_pmf(1.0, 2) == pytest.approx(expected, abs=1e-12)

    def test_binomial_matches_scipy(self):
        fam = Binomial(m=12)
        n = np.arange(13)
        got = fam.log_pmf(5.0, n)
        np.testing.assert_allclose(got, stats.binom.logpmf(n, 12, 5.0 / 12), atol=1e-10)

    @pytest.mark.parametrize("family,lam", COUNT_CASES + [(Poisson(), 20.0)])
    def test_pmf_sums_to_one(self, family, lam):
        support = np.arange(family.m + 1) if isinstance(family, Binomial) else np.arange(201)
        total = np.exp(family.log_pmf(lam, support)).sum()
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            Poisson().log_pmf(-1.0, 2)
        with pytest.raises(ValueError):
            Poisson().log_pmf(1.0, -1)
        with pytest.raises(ValueError):
            Binomial(m=5).log_pmf(2.0, 6)
        with pytest.raises(ValueError):
            Binomial(m=5).log_pmf(6.0, 2)  # mean above trial count

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            ZeroInflatedPoisson(1.0)
        with pytest.raises(ValueError):
            ZeroInflatedPoisson(-0.1)
        with pytest.raises(ValueError):
            Binomial(m=0)


class TestCountMgf:
    def test_normalization_and_low_moments(self):
        for family, lam in COUNT_CASES:
            assert family.mgf(lam, 0.0, 0) == pytest.approx(1.0, rel=1e-12)
            assert family.mgf(lam, 0.0, 1) == pytest.approx(family.mean(lam), rel=1e-12)
            second = family.var(lam) + family.mean(lam) ** 2
            assert family.mgf(lam, 0.0, 2) == pytest.approx(second, rel=1e-12)

    def test_zip_first_derivative_at_zero(self):
        assert ZeroInflatedPoisson(0.2).mgf(1.0, 0.0, 1) == pytest.approx(0.8, abs=1e-14)

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            Poisson().mgf(1.0, 0.0, 3)

    @pytest.mark.parametrize("family,lam", COUNT_CASES + [(Poisson(), 10.0), (ZeroInflatedPoisson(0.2), 10.0)])
    @pytest.mark.parametrize("t", [-1.0, -0.3, 0.0, 0.5, 1.0])
    def test_derivatives_match_finite_differences(self, family, lam, t):
        h = 1e-5
        fd1 = (family.mgf(lam, t + h, 0) - family.mgf(lam, t - h, 0)) / (2 * h)
        assert family.mgf(lam, t, 1) == pytest.approx(fd1, rel=1e-6)
        fd2 = (family.mgf(lam, t + h, 1) - family.mgf(lam, t - h, 1)) / (2 * h)
        assert family.mgf(lam, t, 2) == pytest.approx(fd2, rel=1e-6)

    @pytest.mark.parametrize("family,lam", COUNT_CASES)
    @pytest.mark.parametrize("t", [-1.0, -0.5, 0.0, 0.5, 1.0])
    def test_derivatives_match_truncated_series(self, family, lam, t):
        # E[N^k exp(tN)] by direct summation over the (truncated) support
        n = np.arange(0, family.m + 1 if isinstance(family, Binomial) else 201)
        pmf = np.exp(family.log_pmf(lam, n))
        for order in (0, 1, 2):
            series = float(np.sum(n**order * np.exp(t * n) * pmf))
            assert family.mgf(lam, t, order) == pytest.approx(series, rel=1e-8)

    def test_zip_second_derivative_against_first(self):
        fam = ZeroInflatedPoisson(0.2)
        h = 1e-5
        fd = (fam.mgf(1.0, 0.5 + h, 1) - fam.mgf(1.0, 0.5 - h, 1)) / (2 * h)
        assert fam.mgf(1.0, 0.5, 2) == pytest.approx(fd, rel=1e-6)


class TestSeverityLogDensity:
    def test_gamma_reduces_to_exponential(self):
        # dispersion 1 => shape 1: log(0.5 exp(-1))
        got = Gamma().log_density(2.0, 1.0, 2.0)
        assert got == pytest.approx(math.log(0.5) - 1.0, abs=1e-12)

    def test_standard_normal_at_mode(self):
        got = Normal().log_density(0.0, 1.0, 0.0)
        assert got == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)

    @pytest.mark.parametrize(
        "family,mu,disp",
        [
            (Gamma(), 3.0, 0.5),
            (Gamma(), 1.0, 2.0),
            (InverseGaussian(), 2.0, 0.7),
            (Normal(), 1.5, 0.6),
        ],
    )
    def test_density_normalizes_with_correct_mean(self, family, mu, disp):
        pdf = lambda y: np.exp(family.log_density(mu, disp, y))
        lo = -30.0 if isinstance(family, Normal) else 1e-12
        mass, _ = integrate.quad(pdf, lo, 200.0, limit=200)
        mean, _ = integrate.quad(lambda y: y * pdf(y), lo, 200.0, limit=200)
        assert mass == pytest.approx(1.0, abs=1e-6)
        assert mean == pytest.approx(mu, abs=1e-6)

    def test_matches_scipy_parameterizations(self):
        y = np.array([0.2, 1.0, 3.5, 10.0])
        mu, d = 2.5, 0.4
        np.testing.assert_allclose(
            Gamma().log_density(mu, d, y),
            stats.gamma.logpdf(y, a=1 / d, scale=mu * d),
            atol=1e-10,
        )
        np.testing.assert_allclose(
            InverseGaussian().log_density(mu, d, y),
            stats.invgauss.logpdf(y, mu=mu * d, scale=1 / d),
            atol=1e-10,
        )
        np.testing.assert_allclose(
            Normal().log_density(mu, d, y),
            stats.norm.logpdf(y, loc=mu, scale=math.sqrt(d)),
            atol=1e-10,
        )

    def test_outside_support_is_minus_inf(self):
        assert Gamma().log_density(2.0, 1.0, -1.0) == -np.inf
        assert Gamma().log_density(2.0, 1.0, 0.0) == -np.inf
        assert InverseGaussian().log_density(2.0, 1.0, -0.5) == -np.inf

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            Gamma().log_density(-1.0, 1.0, 2.0)
        with pytest.raises(ValueError):
            Gamma().log_density(1.0, 0.0, 2.0)
        with pytest.raises(ValueError):
            Gamma(dispersion=-0.5)


class TestVarianceFunction:
    def test_power_variance_values(self):
        assert Gamma().variance_function(2.0) == pytest.approx(4.0)
        assert Normal().variance_function(7.0) == pytest.approx(1.0)
        assert InverseGaussian().variance_function(2.0) == pytest.approx(8.0)

    def test_positive_mean_required(self):
        with pytest.raises(ValueError):
            Gamma().variance_function(-2.0)


class TestSampling:
    def test_zip_degenerate_mixture(self):
        rng = np.random.default_rng(0)
        draws = ZeroInflatedPoisson(0.999999).sample(np.full(10_000, 5.0), rng)
        assert np.mean(draws == 0) >= 0.999

    def test_poisson_law_of_large_numbers(self):
        rng = np.random.default_rng(1)
        draws = Poisson().sample(np.full(1_000_000, 4.0), rng)
        assert abs(draws.mean() - 4.0) < 0.01

    def test_gamma_moments(self):
        rng = np.random.default_rng(2)
        draws = Gamma().sample(np.full(1_000_000, 2.0), 0.5, rng)
        assert abs(draws.var() - 2.0) < 0.05  # phi mu^2 = 0.5 * 4

    def test_zip_mean(self):
        rng = np.random.default_rng(3)
        draws = ZeroInflatedPoisson(0.2).sample(np.full(500_000, 2.0), rng)
        se = draws.std() / math.sqrt(len(draws))
        assert abs(draws.mean() - 0.8 * 2.0) < 3 * se

    def test_inverse_gaussian_moments(self):
        rng = np.random.default_rng(4)
        draws = InverseGaussian().sample(np.full(1_000_000, 2.0), 0.5, rng)
        assert abs(draws.mean() - 2.0) < 0.01
        assert abs(draws.var() - 0.5 * 8.0) < 0.1  # phi mu^3

    def test_averaging_shrinks_dispersion(self):
        # the mean of n iid draws keeps the family with dispersion phi / n
        rng = np.random.default_rng(5)
        mu, phi = 2.0, 0.8
        for n in (1, 2, 5):
            draws = Gamma().sample(np.full((1_000_000, n), mu), phi, rng).mean(axis=1)
            expected = (phi / n) * mu**2
            assert abs(draws.var() - expected) / expected < 0.02

    def test_determinism(self):
        a = ZeroInflatedPoisson(0.3).sample(np.full(1000, 2.0), np.random.default_rng(9))
        b = ZeroInflatedPoisson(0.3).sample(np.full(1000, 2.0), np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)


class TestLogGammaAccuracy:
    def test_relative_error_on_wide_range(self):
        # integer factorials give exact references across the range used by
        # the Gamma likelihood
        for k in (1, 2, 5, 10, 50, 170):
            exact = math.lgamma(k)  # C library, exact to < 1 ulp here
            assert gammaln(k) == pytest.approx(exact, rel=1e-14)
        # half-integer closed form: Gamma(0.5) = sqrt(pi)
        assert gammaln(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
        # large arguments, against exact log-factorial accumulation
        log_fact = sum(math.log(i) for i in range(1, 2000))
        assert gammaln(2000) == pytest.approx(log_fact, rel=1e-12)
