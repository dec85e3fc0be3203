"""
Interval estimates for (mu, lambda): Monte Carlo HPD intervals from MCMC
draws, exact pivotal confidence intervals, and parametric bootstrap-p and
bootstrap-t intervals. Also the shape factor and hit/miss classification
used by the simulation study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distribution import sample_array
from .errors import DataError, DegenerateSampleError, DomainError, NumericalError
from .estimators import SufficientStats, mle, mle_arrays, sufficient_stats
from .kde import kde_mode
from .special import RngStream, chi2_quantile, student_t_quantile

HPD = "HPD"
EXACT = "EXACT"
BOOT_P = "BOOT_P"
BOOT_T = "BOOT_T"

COVERED = "COVERED"
MISS_LEFT = "MISS_LEFT"
MISS_RIGHT = "MISS_RIGHT"

PARAMS = ("mu", "lambda")


def shape_factor(lower: float, upper: float, center: float) -> float | None:
    """(upper - center) / (center - lower); None when unbounded or center not strictly inside."""
    if not math.isfinite(upper) or not lower < center < upper:
        return None
    return (upper - center) / (center - lower)


@dataclass(frozen=True)
class IntervalResult:
    lower: float
    upper: float
    method: str
    level: float
    center: float
    shape: float | None = None

    @classmethod
    def build(cls, lower, upper, method, level, center) -> IntervalResult:
        lower, upper, center = float(lower), float(upper), float(center)
        if not lower < upper:
            raise NumericalError(f"{method} interval is empty: ({lower}, {upper})")
        return cls(lower, upper, method, level, center, shape_factor(lower, upper, center))

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class BootConfig:
    """Replicate counts for bootstrap-p (B) and the nested bootstrap-t (B1 outer, B2 inner)."""

    B: int = 1000
    B1: int = 1000
    B2: int = 100
    seed: int = 0

    def __post_init__(self):
        if min(self.B, self.B1, self.B2) < 2:
            raise DomainError("bootstrap replicate counts must all be >= 2")


def _check_level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    return 1.0 - level


def order_stat(sorted_values: np.ndarray, p: float) -> float:
    """The ceil(B p)-th (1-based) value of a sorted array of B replicates."""
    b = sorted_values.size
    idx = min(max(math.ceil(b * p - 1e-9), 1), b)
    return float(sorted_values[idx - 1])


def hpd_interval(draws, level: float = 0.95) -> IntervalResult:
    """
    Shortest interval among (x_(i), x_(i + k)), k = floor(level N), over the
    sorted draws; ties go to the smallest i. The shape factor is measured
    against the KDE mode of the draws.
    """
    _check_level(level)
    x = np.sort(np.asarray(draws, dtype=float).ravel())
    n = x.size
    if n < 10:
        raise DataError(f"HPD needs at least 10 draws, got {n}")
    if n * (1.0 - level) < 1.0 - 1e-9:
        raise DataError(f"{n} draws are too few for a {level} HPD interval")
    k = int(math.floor(level * n + 1e-9))
    widths = x[k:] - x[: n - k]
    i = int(np.argmin(widths))
    try:
        center = kde_mode(x)
    except DegenerateSampleError:
        center = float(x[0])
    return IntervalResult.build(x[i], x[i + k], HPD, level, center)


def equal_tailed_interval(draws, level: float = 0.95) -> tuple[float, float]:
    alpha = _check_level(level)
    x = np.sort(np.asarray(draws, dtype=float).ravel())
    return order_stat(x, alpha / 2.0), order_stat(x, 1.0 - alpha / 2.0)


def _ss(data) -> SufficientStats:
    return data if isinstance(data, SufficientStats) else sufficient_stats(data)


def exact_lambda_ci(data, level: float = 0.95) -> IntervalResult:
    """(chi2_{n-1, alpha/2} / (nV), chi2_{n-1, 1-alpha/2} / (nV)), from n lambda V ~ chi2_{n-1}."""
    alpha = _check_level(level)
    ss = _ss(data)
    if ss.v <= 0:
        raise DegenerateSampleError("V = 0: all observations are equal")
    nv = ss.n * ss.v
    df = ss.n - 1
    return IntervalResult.build(chi2_quantile(alpha / 2.0, df) / nv, chi2_quantile(1.0 - alpha / 2.0, df) / nv,
                                EXACT, level, 1.0 / ss.v)


def exact_mu_ci(data, level: float = 0.95) -> IntervalResult:
    """
    xbar / (1 +- q) with q = sqrt(xbar V / (n - 1)) t_{n-1, 1-alpha/2}; the
    upper end is +inf when q >= 1.
    """
    alpha = _check_level(level)
    ss = _ss(data)
    q = math.sqrt(ss.xbar * ss.v / (ss.n - 1)) * student_t_quantile(1.0 - alpha / 2.0, ss.n - 1)
    upper = ss.xbar / (1.0 - q) if 1.0 - q > 0 else math.inf
    return IntervalResult.build(ss.xbar / (1.0 + q), upper, EXACT, level, ss.xbar)


def _boot_p_replicates(mu_hat, lam_hat, n, B, rng: RngStream):
    return mle_arrays(sample_array(mu_hat, lam_hat, rng, (B, n)))


def _boot_t_replicates(mu_hat, lam_hat, n, B1, B2, rng: RngStream, chunk: int = 100):
    """Outer estimates and studentized pivots T* for both parameters."""
    mu_star, lam_star = mle_arrays(sample_array(mu_hat, lam_hat, rng, (B1, n)))
    t_mu = np.empty(B1)
    t_lam = np.empty(B1)
    for s in range(0, B1, chunk):
        e = min(s + chunk, B1)
        m = mu_star[s:e, None, None]
        l = lam_star[s:e, None, None]
        mu2, lam2 = mle_arrays(sample_array(m, l, rng, (e - s, B2, n)))
        se_mu = mu2.std(axis=1, ddof=1)
        se_lam = lam2.std(axis=1, ddof=1)
        if not (np.all(se_mu > 0) and np.all(se_lam > 0) and np.all(np.isfinite(se_lam))):
            raise NumericalError("inner bootstrap standard error is zero or non-finite")
        t_mu[s:e] = (mu_star[s:e] - mu_hat) / se_mu
        t_lam[s:e] = (lam_star[s:e] - lam_hat) / se_lam
    return {"mu": (mu_star, t_mu), "lambda": (lam_star, t_lam)}


def bootstrap_intervals(data, level: float = 0.95, cfg: BootConfig = BootConfig(),
                        rng: RngStream | None = None) -> dict[tuple[str, str], IntervalResult]:
    """
    Bootstrap-p and bootstrap-t intervals for both parameters from one set of
    parametric resamples. Keys are ``(method, param)``.

    Bootstrap-p uses stream ``rng.split(0)``; bootstrap-t uses ``rng.split(1)``
    (retries after a degenerate inner resample move on to ``split(1).split(k)``).
    """
    alpha = _check_level(level)
    ss = _ss(data)
    if ss.n < 4:
        raise DataError("bootstrap intervals need n >= 4")
    est = mle(ss)
    hat = {"mu": est.mu, "lambda": est.lam}
    rng = rng or RngStream(cfg.seed)
    out = {}

    mu_b, lam_b = _boot_p_replicates(est.mu, est.lam, ss.n, cfg.B, rng.split(0))
    for param, reps in (("mu", mu_b), ("lambda", lam_b)):
        r = np.sort(reps)
        out[(BOOT_P, param)] = IntervalResult.build(order_stat(r, alpha / 2.0), order_stat(r, 1.0 - alpha / 2.0),
                                                    BOOT_P, level, hat[param])

    stream = rng.split(1)
    for attempt in range(4):
        try:
            reps_t = _boot_t_replicates(est.mu, est.lam, ss.n, cfg.B1, cfg.B2, stream)
            break
        except NumericalError:
            if attempt == 3:
                raise
            stream = rng.split(1).split(attempt + 1)
    for param in PARAMS:
        star, t = reps_t[param]
        se = float(np.std(star, ddof=1))
        ts = np.sort(t)
        lo = hat[param] - order_stat(ts, 1.0 - alpha / 2.0) * se
        hi = hat[param] - order_stat(ts, alpha / 2.0) * se
        out[(BOOT_T, param)] = IntervalResult.build(lo, hi, BOOT_T, level, hat[param])
    return out


def _check_param(param: str) -> None:
    if param not in PARAMS:
        raise DomainError(f"param must be one of {PARAMS}, got {param!r}")


def boot_p_ci(data, param: str, level: float = 0.95, cfg: BootConfig = BootConfig(),
              rng: RngStream | None = None) -> IntervalResult:
    """Percentile bootstrap interval from B parametric resamples of IG(mu_hat, lam_hat)."""
    _check_param(param)
    alpha = _check_level(level)
    ss = _ss(data)
    if ss.n < 4:
        raise DataError("bootstrap intervals need n >= 4")
    est = mle(ss)
    rng = rng or RngStream(cfg.seed)
    mu_b, lam_b = _boot_p_replicates(est.mu, est.lam, ss.n, cfg.B, rng.split(0))
    reps, center = (mu_b, est.mu) if param == "mu" else (lam_b, est.lam)
    r = np.sort(reps)
    return IntervalResult.build(order_stat(r, alpha / 2.0), order_stat(r, 1.0 - alpha / 2.0), BOOT_P, level, center)


def boot_t_ci(data, param: str, level: float = 0.95, cfg: BootConfig = BootConfig(),
              rng: RngStream | None = None) -> IntervalResult:
    """Studentized (percentile-t) bootstrap interval with a nested B1 x B2 resampling scheme."""
    _check_param(param)
    return bootstrap_intervals(data, level, cfg, rng)[(BOOT_T, param)]


def classify_coverage(iv: IntervalResult, truth: float) -> str:
    if truth < iv.lower:
        return MISS_LEFT
    if truth > iv.upper:
        return MISS_RIGHT
    return COVERED
