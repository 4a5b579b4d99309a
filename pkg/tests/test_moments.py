"""Aggregate-loss moments: closed forms against algebra and Monte Carlo."""

import math

import numpy as np
import pytest

from freqsev.families import Gamma, InverseGaussian, Normal, Poisson, ZeroInflatedPoisson
from freqsev.moments import (
    aggregate_mean,
    aggregate_moments,
    aggregate_variance,
    expected_count_times_variance,
    simulate_aggregate,
)


class TestAggregateMean:
    def test_independence_collapse(self):
        # gamma = 0: mean reduces to exp(s) E[N]
        assert aggregate_mean(Poisson(), 3.0, 0.0, 0.0) == pytest.approx(3.0, rel=1e-12)

    def test_level_scaling(self):
        for family, lam in [(Poisson(), 2.0), (ZeroInflatedPoisson(0.3), 1.5)]:
            base = aggregate_mean(family, lam, 0.0, 0.0)
            assert aggregate_mean(family, lam, math.log(2.0), 0.0) == pytest.approx(2 * base, rel=1e-12)

    def test_zero_inflated_closed_form(self):
        # (1-pi) lam exp(lam (e^g - 1) + g) with s = 0
        expected = 0.8 * math.exp(math.expm1(0.5) + 0.5)
        assert aggregate_mean(ZeroInflatedPoisson(0.2), 1.0, 0.0, 0.5) == pytest.approx(expected, rel=1e-12)
        # frozen value confirmed against simulate_aggregate(1e7) at 3 SE
        assert expected == pytest.approx(2.5233256134709285, rel=1e-12)


class TestAggregateVariance:
    def test_compound_poisson_gamma_independent(self):
        # phi lam + lam = 0.5*2 + 2
        got = aggregate_variance(Poisson(), 2.0, Gamma(dispersion=0.5), 0.0, 0.0)
        assert got == pytest.approx(3.0, rel=1e-12)

    def test_unit_mean_normal_severity(self):
        # E[N] + Var[N] with phi = 1, k = 0
        got = aggregate_variance(Poisson(), 1.0, Normal(dispersion=1.0), 0.0, 0.0)
        assert got == pytest.approx(2.0, rel=1e-12)

    def test_independence_reduction_is_algebraic(self):
        # gamma = 0: var = phi e^{ks} E[N] + e^{2s} Var[N], exactly
        severities = [Gamma(dispersion=0.5), InverseGaussian(dispersion=0.7), Normal(dispersion=1.3)]
        counts = [(Poisson(), 2.0), (ZeroInflatedPoisson(0.25), 1.5), (Poisson(), 0.5)]
        for sev in severities:
            for fam, lam in counts:
                for s in (0.0, 0.7):
                    got = aggregate_variance(fam, lam, sev, s, 0.0)
                    expected = sev.dispersion * math.exp(sev.variance_power * s) * fam.mean(lam) + math.exp(
                        2 * s
                    ) * fam.var(lam)
                    assert got == pytest.approx(expected, rel=1e-12)

    def test_zero_inflated_gamma_closed_form(self):
        # mixture algebra: (1-pi) lam e^{2(s+g)} ((1 + lam e^{2g} + phi) e^{lam(e^{2g}-1)}
        #                  - (1-pi) lam e^{2 lam (e^g - 1)})
        pi, lam, phi, s, g = 0.2, 1.0, 1.0, 0.0, 0.5
        bracket = (1 + lam * math.exp(2 * g) + phi) * math.exp(lam * math.expm1(2 * g)) - (
            1 - pi
        ) * lam * math.exp(2 * lam * math.expm1(g))
        expected = (1 - pi) * lam * math.exp(2 * (s + g)) * bracket
        got = aggregate_variance(ZeroInflatedPoisson(pi), lam, Gamma(dispersion=phi), s, g)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_negative_variance_guard(self):
        class BrokenCount:
            def mgf(self, lam, t, order=0):
                # second moment smaller than the squared first moment
                return 1.0 if order == 2 else 10.0

        with pytest.raises(ArithmeticError):
            aggregate_variance(BrokenCount(), 1.0, Gamma(dispersion=1.0), 0.0, 0.1)

    def test_monotonicity_in_level_and_dependence(self):
        fam = ZeroInflatedPoisson(0.2)
        means = [aggregate_mean(fam, 1.2, s, 0.3) for s in np.linspace(-1, 1, 9)]
        assert np.all(np.diff(means) > 0)
        means_g = [aggregate_mean(fam, 1.2, 0.0, g) for g in np.linspace(0.0, 0.6, 7)]
        assert np.all(np.diff(means_g) >= 0)


class TestCountVarianceSeries:
    @pytest.mark.parametrize(
        "count,lam,severity,s,g",
        [
            (Poisson(), 2.0, Gamma(dispersion=0.5), 0.3, 0.4),
            (ZeroInflatedPoisson(0.2), 1.0, Gamma(dispersion=1.0), 0.0, 0.5),
            (Poisson(), 1.5, InverseGaussian(dispersion=0.7), 0.2, -0.3),
            (ZeroInflatedPoisson(0.3), 0.8, Normal(dispersion=1.0), 0.5, 0.2),
        ],
    )
    def test_series_matches_power_variance_identity(self, count, lam, severity, s, g):
        # E[N V(mu)] = e^{ks} M1(k g) for V(mu) = mu^k
        k = severity.variance_power
        closed = math.exp(k * s) * count.mgf(lam, k * g, 1)
        series = expected_count_times_variance(count, lam, severity, s, g)
        assert series == pytest.approx(closed, rel=1e-10)

    def test_tail_bound_enforced(self):
        with pytest.raises(ArithmeticError):
            expected_count_times_variance(Poisson(), 5.0, Gamma(dispersion=1.0), 0.0, 2.5, n_max=50)


class TestMonteCarloOracle:
    def test_determinism(self):
        a = simulate_aggregate(ZeroInflatedPoisson(0.2), 1.0, Gamma(dispersion=1.0), 0.0, 0.5, 50_000, 11)
        b = simulate_aggregate(ZeroInflatedPoisson(0.2), 1.0, Gamma(dispersion=1.0), 0.0, 0.5, 50_000, 11)
        assert a == b

    def test_minimum_draws(self):
        with pytest.raises(ValueError):
            simulate_aggregate(Poisson(), 1.0, Gamma(), 0.0, 0.0, 100, 0)

    def test_independent_compound_mean(self):
        mc = simulate_aggregate(Poisson(), 3.0, Gamma(dispersion=1.0), 0.0, 0.0, 1_000_000, 5)
        assert abs(mc.mean - 3.0) <= 3 * mc.se_mean

    @pytest.mark.parametrize("count_pi", [None, 0.2])
    @pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
    @pytest.mark.parametrize("gamma", [-0.3, 0.0, 0.3])
    @pytest.mark.parametrize("s", [0.0, 0.7])
    @pytest.mark.parametrize("phi", [0.5, 1.0])
    def test_closed_forms_agree_with_simulation(self, count_pi, lam, gamma, s, phi):
        count = Poisson() if count_pi is None else ZeroInflatedPoisson(count_pi)
        severity = Gamma(dispersion=phi)
        mc = simulate_aggregate(count, lam, severity, s, gamma, 1_000_000, seed=hash((lam, gamma, s, phi)) % 2**32)
        mom = aggregate_moments(count, lam, severity, s, gamma)
        assert abs(mom.mean - mc.mean) <= 4 * mc.se_mean
        assert abs(mom.variance - mc.variance) <= 4 * mc.se_variance
