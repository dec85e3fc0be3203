"""Sufficient statistics and the classical MLE / UMVUE point estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, DegenerateSampleError, InsufficientSampleError

MLE = "MLE"
UMVUE = "UMVUE"
LINDLEY = "LINDLEY"
GIBBS = "GIBBS"


def as_sample(values: Sequence[float], min_size: int = 2) -> np.ndarray:
    """Validate observations and return them as a float array."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < min_size:
        raise InsufficientSampleError(f"need at least {min_size} observations, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DataError("all observations must be finite and strictly positive")
    return x


@dataclass(frozen=True)
class SufficientStats:
    """
    n, alpha = sum(x)/2, beta = sum(1/x)/2, the sample mean and
    V = sum(1/x_i - 1/xbar)/n. Every estimator in the package reads from here.
    """

    n: int
    alpha: float
    beta: float
    xbar: float
    v: float

    @property
    def reciprocal_spread(self) -> float:
        """sum(1/x_i - 1/xbar) = n V."""
        return self.n * self.v


@dataclass(frozen=True)
class PointEstimates:
    mu: float
    lam: float
    method: str

    @property
    def valid(self) -> bool:
        # a Lindley lambda can come out negative for small n; kept raw on purpose
        return self.mu > 0 and self.lam > 0


def sufficient_stats(values: Sequence[float]) -> SufficientStats:
    x = as_sample(values)
    n = x.size
    total = math.fsum(x)
    xbar = total / n
    if np.all(x == x[0]):
        v = 0.0
    else:
        inv_xbar = 1.0 / xbar
        # exact summation: the terms nearly cancel when the data are close to constant
        v = max(0.0, math.fsum(1.0 / x - inv_xbar) / n)
    return SufficientStats(n=n, alpha=total / 2.0, beta=math.fsum(1.0 / x) / 2.0, xbar=xbar, v=v)


def _stats(data) -> SufficientStats:
    return data if isinstance(data, SufficientStats) else sufficient_stats(data)


def mle(data) -> PointEstimates:
    """mu_hat = xbar, lam_hat = n / sum(1/x_i - 1/xbar). Accepts a sample or its stats."""
    ss = _stats(data)
    if ss.v <= 0:
        raise DegenerateSampleError("all observations are equal; the MLE of lambda is infinite")
    return PointEstimates(ss.xbar, 1.0 / ss.v, MLE)


def umvue(data) -> PointEstimates:
    """mu_tilde = xbar, lam_tilde = (n - 3) / sum(1/x_i - 1/xbar); requires n >= 4."""
    ss = _stats(data)
    if ss.n < 4:
        raise InsufficientSampleError(f"UMVUE of lambda needs n >= 4, got n = {ss.n}")
    if ss.v <= 0:
        raise DegenerateSampleError("all observations are equal; the UMVUE of lambda is infinite")
    return PointEstimates(ss.xbar, (ss.n - 3) / ss.reciprocal_spread, UMVUE)


def mle_arrays(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise MLEs for a stack of samples along the last axis (bootstrap use)."""
    xbar = x.mean(axis=-1)
    spread = (1.0 / x).mean(axis=-1) - 1.0 / xbar
    with np.errstate(divide="ignore"):
        lam = 1.0 / spread
    return xbar, lam
