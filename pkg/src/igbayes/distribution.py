"""
Inverse Gaussian distribution IG(mu, lam).

    f(x | mu, lam) = sqrt(lam / (2 pi x^3)) * exp(-lam (x - mu)^2 / (2 mu^2 x)),  x > 0

with E(X) = mu and Var(X) = mu^3 / lam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .special import RngStream, log_normal_cdf, normal_cdf


@dataclass(frozen=True)
class IgParams:
    """Mean ``mu`` and shape ``lam`` of an inverse Gaussian law; both in data units."""

    mu: float
    lam: float

    def __post_init__(self):
        if not (self.mu > 0 and self.lam > 0):
            raise DomainError(f"IG parameters must be positive, got mu={self.mu}, lam={self.lam}")
        if not (math.isfinite(self.mu) and math.isfinite(self.lam)):
            raise DomainError("IG parameters must be finite")

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.mu**3 / self.lam


def _check_x(x: float) -> None:
    if not x > 0:
        raise DomainError(f"IG support is x > 0, got {x}")


def logpdf(x: float, p: IgParams) -> float:
    _check_x(x)
    return 0.5 * math.log(p.lam / (2.0 * math.pi * x**3)) - p.lam * (x - p.mu) ** 2 / (2.0 * p.mu**2 * x)


def pdf(x: float, p: IgParams) -> float:
    return math.exp(logpdf(x, p))


def cdf(x: float, p: IgParams) -> float:
    """
    P(X <= x). The second term exp(2 lam / mu) * Phi(-.) is combined in log
    space because 2 lam / mu alone can overflow a double.
    """
    _check_x(x)
    r = math.sqrt(p.lam / x)
    first = normal_cdf(r * (x / p.mu - 1.0))
    log_second = 2.0 * p.lam / p.mu + log_normal_cdf(-r * (x / p.mu + 1.0))
    return min(1.0, first + math.exp(log_second))


def cdf_array(x, p: IgParams) -> np.ndarray:
    """Elementwise :func:`cdf` over an array of positive points."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("IG support is x > 0")
    r = np.sqrt(p.lam / x)
    out = special.ndtr(r * (x / p.mu - 1.0)) + np.exp(2.0 * p.lam / p.mu + special.log_ndtr(-r * (x / p.mu + 1.0)))
    return np.minimum(out, 1.0)


def _transform(mu, lam, nu, u):
    # Michael-Schucany-Haas. The roots of lam (x - mu)^2 = nu mu^2 x multiply to
    # mu^2, so the small root x1 is taken as mu^2 / x2 to avoid cancellation.
    mnu = mu * nu
    x2 = mu + mu * mnu / (2.0 * lam) + (mu / (2.0 * lam)) * np.sqrt(4.0 * lam * mnu + mnu * mnu)
    x1 = mu * mu / x2
    return np.where(u <= mu / (mu + x1), x1, x2)


def sample(p: IgParams, rng: RngStream) -> float:
    """One IG(mu, lam) draw."""
    nu = rng.normal() ** 2
    u = rng.uniform()
    x = float(_transform(p.mu, p.lam, nu, u))
    assert x > 0.0
    return x


def sample_array(mu, lam, rng: RngStream, size) -> np.ndarray:
    """
    Array of IG draws. ``mu`` and ``lam`` may be arrays broadcastable against
    ``size`` (used by the nested bootstrap, where every row has its own fit).
    """
    nu = rng.normal(size) ** 2
    u = rng.uniform(size=size)
    return _transform(np.asarray(mu, dtype=float), np.asarray(lam, dtype=float), nu, u)
