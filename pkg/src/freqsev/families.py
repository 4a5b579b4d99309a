"""Count and severity distribution families.

Count families (Poisson, zero-inflated Poisson, Binomial) expose the log
pmf, exact samplers, and the moment generating function together with its
first two derivatives,

    M(t)  = E[exp(tN)],
    M1(t) = E[N exp(tN)],
    M2(t) = E[N^2 exp(tN)],

which drive the closed-form aggregate-loss moments.  All three families
have an MGF that is finite for every real t.

Severity families (Gamma, inverse Gaussian, Normal) are parameterized by
their mean ``mu`` and a dispersion ``phi`` with ``Var[Y] = phi * V(mu)``
and power variance functions V(mu) = mu^2, mu^3 and 1 respectively.  The
average of n independent draws stays in the same family with dispersion
``phi / n``, so log densities take the effective dispersion as an explicit
argument; callers modelling an average of n claims pass ``phi / n``.

The Gamma family uses the (mean, dispersion) parameterization throughout:
shape ``nu = 1 / dispersion``, ``E[Y] = mu`` and ``Var[Y] = dispersion *
mu^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "Poisson",
    "ZeroInflatedPoisson",
    "Binomial",
    "Gamma",
    "InverseGaussian",
    "Normal",
    "CountFamily",
    "SeverityFamily",
]


def _scalar_or_array(a: np.ndarray):
    """Return a Python float/int for 0-d results, the array otherwise."""
    return a.item() if a.ndim == 0 else a


def _check_counts(n) -> np.ndarray:
    n = np.asarray(n)
    if not np.issubdtype(n.dtype, np.number) or np.any(n != np.floor(n)):
        raise ValueError("claim counts must be integers")
    if np.any(n < 0):
        raise ValueError("claim counts must be non-negative")
    return n.astype(np.int64)


def _check_rate(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam <= 0):
        raise ValueError("frequency mean must be positive")
    return lam


def _poisson_log_pmf(lam, n):
    return n * np.log(lam) - lam - gammaln(n + 1.0)


@dataclass(frozen=True)
class Poisson:
    """Poisson count family: P(N=n) = exp(-lam) lam^n / n!."""

    def log_pmf(self, lam, n):
        lam = _check_rate(lam)
        n = _check_counts(n)
        return _scalar_or_array(_poisson_log_pmf(lam, n))

    def mgf(self, lam, t, order: int = 0):
        """M(t) and its first two derivatives.

        M(t) = exp(lam (e^t - 1)); differentiating gives
        M1(t) = lam exp(lam (e^t - 1) + t) and
        M2(t) = lam (lam e^t + 1) exp(lam (e^t - 1) + t).
        """
        lam = _check_rate(lam)
        t = np.asarray(t, dtype=np.float64)
        core = np.exp(lam * np.expm1(t))
        if order == 0:
            out = core
        elif order == 1:
            out = lam * core * np.exp(t)
        elif order == 2:
            out = lam * (lam * np.exp(t) + 1.0) * core * np.exp(t)
        else:
            raise ValueError(f"mgf order must be 0, 1 or 2, got {order}")
        return _scalar_or_array(out)

    def mean(self, lam):
        return _scalar_or_array(_check_rate(lam))

    def var(self, lam):
        return _scalar_or_array(_check_rate(lam))

    def sample(self, lam, rng: np.random.Generator, size=None):
        lam = _check_rate(lam)
        return rng.poisson(lam, size=size)


@dataclass(frozen=True)
class ZeroInflatedPoisson:
    """Zero-inflated Poisson: extra point mass pi at zero.

    P(N=0) = pi + (1-pi) exp(-lam) and
    P(N=n) = (1-pi) exp(-lam) lam^n / n! for n >= 1.
    """

    pi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.pi < 1.0:
            raise ValueError(f"zero-inflation probability must lie in [0, 1), got {self.pi}")

    def log_pmf(self, lam, n):
        lam = _check_rate(lam)
        n = _check_counts(n)
        with np.errstate(divide="ignore"):
            log_pi = np.log(self.pi)
        log_1mpi = np.log1p(-self.pi)
        log_p0 = np.logaddexp(log_pi, log_1mpi - lam)
        return _scalar_or_array(
            np.where(n == 0, log_p0, log_1mpi + _poisson_log_pmf(lam, n))
        )

    def mgf(self, lam, t, order: int = 0):
        """Mixture MGF: pi + (1-pi) M_pois(t); derivatives drop the pi term."""
        pois = Poisson().mgf(lam, t, order)
        if order == 0:
            out = self.pi + (1.0 - self.pi) * np.asarray(pois)
        else:
            out = (1.0 - self.pi) * np.asarray(pois)
        return _scalar_or_array(np.asarray(out))

    def mean(self, lam):
        return _scalar_or_array((1.0 - self.pi) * _check_rate(lam))

    def var(self, lam):
        lam = _check_rate(lam)
        return _scalar_or_array((1.0 - self.pi) * (lam + self.pi * lam**2))

    def sample(self, lam, rng: np.random.Generator, size=None):
        """Two-stage mixture: Bernoulli(pi) structural zero, else Poisson."""
        lam = _check_rate(lam)
        draws = rng.poisson(lam, size=size)
        structural = rng.random(size=np.shape(draws)) < self.pi
        return np.where(structural, 0, draws) if np.ndim(draws) else (
            0 if structural else draws
        )


@dataclass(frozen=True)
class Binomial:
    """Binomial count family with m trials and mean lam (success prob lam/m)."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"number of trials must be a positive integer, got {self.m}")

    def _success_prob(self, lam):
        lam = _check_rate(lam)
        if np.any(lam >= self.m):
            raise ValueError("frequency mean must be below the number of trials")
        return lam / self.m

    def log_pmf(self, lam, n):
        p = self._success_prob(lam)
        n = _check_counts(n)
        if np.any(n > self.m):
            raise ValueError("claim count exceeds the number of trials")
        m = float(self.m)
        return _scalar_or_array(
            gammaln(m + 1.0)
            - gammaln(n + 1.0)
            - gammaln(m - n + 1.0)
            + n * np.log(p)
            + (m - n) * np.log1p(-p)
        )

    def mgf(self, lam, t, order: int = 0):
        """M(t) = (1 - p + p e^t)^m with p = lam/m.

        Differentiating the base form gives
        M1(t) = lam e^t (1 - p + p e^t)^(m-1) and
        M2(t) = lam e^t (1 - p + p e^t)^(m-2) ((1 - p + p e^t) + (m-1) p e^t).
        """
        p = self._success_prob(lam)
        lam = np.asarray(lam, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        base = 1.0 - p + p * np.exp(t)
        if order == 0:
            out = base**self.m
        elif order == 1:
            out = lam * np.exp(t) * base ** (self.m - 1)
        elif order == 2:
            out = lam * np.exp(t) * base ** (self.m - 2) * (base + (self.m - 1) * p * np.exp(t))
        else:
            raise ValueError(f"mgf order must be 0, 1 or 2, got {order}")
        return _scalar_or_array(out)

    def mean(self, lam):
        return _scalar_or_array(_check_rate(lam))

    def var(self, lam):
        lam = _check_rate(lam)
        return _scalar_or_array(lam * (1.0 - lam / self.m))

    def sample(self, lam, rng: np.random.Generator, size=None):
        p = self._success_prob(lam)
        return rng.binomial(self.m, p, size=size)


def _check_severity_args(mu, dispersion, positive_mean: bool):
    mu = np.asarray(mu, dtype=np.float64)
    dispersion = np.asarray(dispersion, dtype=np.float64)
    if positive_mean and np.any(mu <= 0):
        raise ValueError("severity mean must be positive")
    if np.any(dispersion <= 0):
        raise ValueError("dispersion must be positive")
    return mu, dispersion


@dataclass(frozen=True)
class Gamma:
    """Gamma severity with mean mu and dispersion phi (shape nu = 1/phi)."""

    dispersion: float = 1.0
    variance_power: int = 2

    def __post_init__(self):
        if self.dispersion <= 0:
            raise ValueError(f"dispersion must be positive, got {self.dispersion}")

    def log_density(self, mu, eff_dispersion, y):
        """log f(y) = nu log(nu/mu) - log Gamma(nu) + (nu-1) log y - nu y / mu."""
        mu, d = _check_severity_args(mu, eff_dispersion, positive_mean=True)
        y = np.asarray(y, dtype=np.float64)
        nu = 1.0 / d
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = (
                nu * np.log(nu / mu)
                - gammaln(nu)
                + (nu - 1.0) * np.log(y)
                - nu * y / mu
            )
        return _scalar_or_array(np.where(y > 0, vals, -np.inf))

    def variance_function(self, mu):
        mu = np.asarray(mu, dtype=np.float64)
        if np.any(mu <= 0):
            raise ValueError("variance function requires a positive mean")
        return _scalar_or_array(mu**2)

    def sample(self, mu, eff_dispersion, rng: np.random.Generator, size=None):
        mu, d = _check_severity_args(mu, eff_dispersion, positive_mean=True)
        return rng.gamma(1.0 / d, mu * d, size=size)


@dataclass(frozen=True)
class InverseGaussian:
    """Inverse Gaussian severity with mean mu and dispersion phi."""

    dispersion: float = 1.0
    variance_power: int = 3

    def __post_init__(self):
        if self.dispersion <= 0:
            raise ValueError(f"dispersion must be positive, got {self.dispersion}")

    def log_density(self, mu, eff_dispersion, y):
        """log f(y) = -0.5 log(2 pi y^3 d) - (y - mu)^2 / (2 d mu^2 y)."""
        mu, d = _check_severity_args(mu, eff_dispersion, positive_mean=True)
        y = np.asarray(y, dtype=np.float64)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = -0.5 * np.log(2.0 * np.pi * y**3 * d) - (y - mu) ** 2 / (
                2.0 * d * mu**2 * y
            )
        return _scalar_or_array(np.where(y > 0, vals, -np.inf))

    def variance_function(self, mu):
        mu = np.asarray(mu, dtype=np.float64)
        if np.any(mu <= 0):
            raise ValueError("variance function requires a positive mean")
        return _scalar_or_array(mu**3)

    def sample(self, mu, eff_dispersion, rng: np.random.Generator, size=None):
        mu, d = _check_severity_args(mu, eff_dispersion, positive_mean=True)
        return rng.wald(mu, 1.0 / d, size=size)


@dataclass(frozen=True)
class Normal:
    """Normal severity with mean mu and variance equal to the dispersion."""

    dispersion: float = 1.0
    variance_power: int = 0

    def __post_init__(self):
        if self.dispersion <= 0:
            raise ValueError(f"dispersion must be positive, got {self.dispersion}")

    def log_density(self, mu, eff_dispersion, y):
        mu = np.asarray(mu, dtype=np.float64)
        _, d = _check_severity_args(1.0, eff_dispersion, positive_mean=False)
        y = np.asarray(y, dtype=np.float64)
        return _scalar_or_array(-0.5 * np.log(2.0 * np.pi * d) - (y - mu) ** 2 / (2.0 * d))

    def variance_function(self, mu):
        mu = np.asarray(mu, dtype=np.float64)
        return _scalar_or_array(np.ones_like(mu))

    def sample(self, mu, eff_dispersion, rng: np.random.Generator, size=None):
        mu = np.asarray(mu, dtype=np.float64)
        _, d = _check_severity_args(1.0, eff_dispersion, positive_mean=False)
        return rng.normal(mu, np.sqrt(d), size=size)


CountFamily = Poisson | ZeroInflatedPoisson | Binomial
SeverityFamily = Gamma | InverseGaussian | Normal
