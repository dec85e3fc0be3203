"""
Two-stage Gibbs sampler for the joint posterior

    p(mu, lam | x) ~ mu^(a-1) e^(-b mu) lam^(c + n/2 - 1) exp[-lam (alpha/mu^2 - n/mu + beta + d)]

lam | mu is Gamma(c + n/2, alpha/mu^2 - n/mu + beta + d).
mu | lam has the unnormalized density

    g(mu) = mu^(a-1) exp(-alpha lam / mu^2 + n lam / mu - b mu)

which is not log-concave. It is sampled by numerical inverse transform: find
a truncation point holding essentially all of the mass, integrate g
cumulatively on a grid, draw u ~ U(0, T) and invert the cumulative integral.

When b = 0 the mu conditional tends to mu^(a-1) as mu grows and has infinite
mass (this includes the vague prior a=1, b=c=d=0). Sampling then needs an
explicit upper bound; results describe the posterior truncated to (0, M].
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import IgParams
from .errors import DomainError, ImproperConditionalError, NumericalError
from .estimators import SufficientStats, mle, sufficient_stats
from .kde import kde_mode
from .lindley import PriorHyper
from .special import RngStream

# log-density drop treated as "no mass left" when bracketing the grid
_LOG_NEGLIGIBLE = 45.0
_LN2 = math.log(2.0)


@functools.lru_cache(maxsize=8)
def _index_grid(n: int) -> np.ndarray:
    return np.arange(n, dtype=float)


@dataclass(frozen=True)
class GibbsConfig:
    """
    Chain settings. ``truncate`` is an absolute upper bound M on mu; when it is
    None and the mu conditional is improper, M = ``truncate_factor * xbar``.
    """

    burn_in: int = 1000
    thin: int = 5
    n_keep: int = 1000
    init: IgParams | None = None
    seed: int = 0
    truncate: float | None = None
    truncate_factor: float = 3.0
    grid_points: int = 1025

    def __post_init__(self):
        if self.burn_in < 0 or self.thin < 1 or self.n_keep < 2:
            raise DomainError("need burn_in >= 0, thin >= 1, n_keep >= 2")
        if self.truncate is not None and not self.truncate > 0:
            raise DomainError("truncate must be positive")
        if self.grid_points < 17:
            raise DomainError("grid_points must be at least 17")


def lambda_conditional_params(mu: float, ss: SufficientStats, prior: PriorHyper) -> tuple[float, float]:
    """Shape and rate of the gamma full conditional of lambda given mu."""
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    shape = prior.c + ss.n / 2.0
    rate = ss.alpha / mu**2 - ss.n / mu + ss.beta + prior.d
    if not rate > 0:
        raise NumericalError(f"lambda conditional rate is {rate} at mu={mu}")
    return shape, rate


def _cubic_positive_roots(c3: float, c2: float, c1: float, c0: float) -> list[float]:
    """Positive real roots of c3 x^3 + c2 x^2 + c1 x + c0 (degree may drop)."""
    if c3 == 0.0:
        if c2 == 0.0:
            return [-c0 / c1] if c1 != 0.0 and -c0 / c1 > 0 else []
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        q = -0.5 * (c1 + math.copysign(sq, c1))
        roots = [q / c2] + ([c0 / q] if q != 0.0 else [])
        return [r for r in roots if r > 0]
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    q = (a * a - 3.0 * b) / 9.0
    r = (2.0 * a**3 - 9.0 * a * b + 27.0 * c) / 54.0
    if r * r < q**3:
        th = math.acos(max(-1.0, min(1.0, r / math.sqrt(q**3))))
        m = -2.0 * math.sqrt(q)
        roots = [m * math.cos((th + k * 2.0 * math.pi) / 3.0) - a / 3.0 for k in range(3)]
    else:
        big = -math.copysign((abs(r) + math.sqrt(r * r - q**3)) ** (1.0 / 3.0), r)
        small = q / big if big != 0.0 else 0.0
        roots = [big + small - a / 3.0]
    return [x for x in roots if x > 0]


def _cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """
    Cumulative integral on a uniform grid, each cell from a local quadratic
    fit, starting at 0. Cells are floored at zero (the fit can dip below on
    steep edges) so the result is non-decreasing.
    """
    seg = np.empty(y.size - 1)
    seg[:-1] = 5.0 * y[:-2] + 8.0 * y[1:-1] - y[2:]
    seg[-1] = -y[-3] + 8.0 * y[-2] + 5.0 * y[-1]
    np.maximum(seg, 0.0, out=seg)
    out = np.empty(y.size)
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    out *= h / 12.0
    return out


class MuConditional:
    """
    Inverse-CDF sampler for mu | lambda, built once per lambda value.

    Work is done in t = log(mu), where the integrand is G(t) = g(e^t) e^t and
    g(c) c = G(log c). The stationary points of G are the positive roots of
    -b mu^3 + a mu^2 - n lam mu + 2 alpha lam, so the peak is located exactly.
    The grid ends are found by doubling / halving mu away from the outermost
    stationary points until G falls e^-45 below its peak; past the last
    stationary point G is decreasing, so that also bounds the mass any further
    doubling could add (far below 1e-6 relative). With a truncation bound the
    upper end is capped at log(M); improper conditionals use log(M) directly.
    """

    def __init__(self, lam: float, ss: SufficientStats, prior: PriorHyper, upper: float | None = None,
                 grid_points: int = 1025):
        if not lam > 0:
            raise DomainError(f"lambda must be positive, got {lam}")
        if upper is None and not prior.mu_proper:
            raise ImproperConditionalError(
                "mu conditional is not integrable when b = 0; pass a truncation bound")
        self.lam = lam
        self.a = prior.a
        self.b = prior.b
        self.k2 = ss.alpha * lam
        self.k1 = ss.n * lam
        self.upper = upper

        crit = [math.log(r) for r in _cubic_positive_roots(-self.b, self.a, -self.k1, 2.0 * self.k2)]
        if not crit:
            crit = [math.log(2.0 * self.k2 / self.k1)]
        self.log_peak = max(self.log_G(t) for t in crit)
        t_lo = self._walk(min(crit), -1.0, stop=math.log(1e-12 * ss.xbar))
        if upper is not None and not prior.mu_proper:
            t_hi = math.log(upper)
        else:
            t_hi = self._walk(max(crit), 1.0)
            if upper is not None:
                t_hi = min(t_hi, math.log(upper))
        if t_hi <= t_lo:
            t_lo = t_hi - 10.0

        npts = grid_points | 1
        self.h = (t_hi - t_lo) / (npts - 1)
        self.t = t_lo + self.h * _index_grid(npts)
        log_g = self._log_G_arr(self.t)
        self.G = np.exp(log_g - log_g.max())
        self.cum = _cumulative_simpson(self.G, self.h)
        self.total = float(self.cum[-1])
        if not self.total > 0 or not math.isfinite(self.total):
            raise NumericalError("mu conditional has no mass on the integration grid")

    def log_G(self, t: float) -> float:
        e = math.exp(-t)
        return self.a * t - self.k2 * e * e + self.k1 * e - self.b / e

    def _log_G_arr(self, t: np.ndarray) -> np.ndarray:
        e = np.exp(-t)
        return self.a * t - self.k2 * e * e + self.k1 * e - self.b / e

    def _walk(self, t0: float, direction: float, stop: float | None = None) -> float:
        """Double (or halve) mu from exp(t0) until log G is negligible relative to the peak."""
        t = t0
        for _ in range(2000):
            t += direction * _LN2
            if stop is not None and (t - stop) * direction >= 0:
                return stop
            if self.log_G(t) < self.log_peak - _LOG_NEGLIGIBLE:
                return t
        raise NumericalError("could not bracket the mass of the mu conditional")

    def invert(self, u):
        """Map u in [0, T) to mu with integral_0^mu g = u (grid-normalized units)."""
        if np.ndim(u) == 0:
            return self._invert_one(float(u))
        return np.array([self._invert_one(float(v)) for v in np.ravel(u)]).reshape(np.shape(u))

    def _invert_one(self, u: float) -> float:
        k = int(self.cum.searchsorted(u, side="right"))
        k = min(max(k, 1), self.t.size - 1)
        g0 = float(self.G[k - 1])
        slope = (float(self.G[k]) - g0) / self.h
        rem = max(u - float(self.cum[k - 1]), 0.0)
        # G linear on the cell: g0 s + slope s^2 / 2 = rem
        denom = g0 + math.sqrt(max(g0 * g0 + 2.0 * slope * rem, 0.0))
        s = 2.0 * rem / denom if denom > 0 else 0.0
        return math.exp(float(self.t[k - 1]) + min(max(s, 0.0), self.h))

    def draw(self, rng: RngStream, size=None):
        u = rng.uniform(0.0, self.total, size)
        if size is None:
            return self._invert_one(float(u))
        return self.invert(u)


def sample_mu_conditional(lam: float, ss: SufficientStats, prior: PriorHyper, rng: RngStream,
                          upper: float | None = None, size=None, grid_points: int = 1025):
    """Draw mu from its full conditional given lambda (optionally truncated to (0, upper])."""
    return MuConditional(lam, ss, prior, upper, grid_points).draw(rng, size)


def _lag1(x: np.ndarray) -> float:
    x = x - x.mean()
    denom = float(np.dot(x, x))
    return float(np.dot(x[:-1], x[1:]) / denom) if denom > 0 else 0.0


@dataclass
class McmcChain:
    mu: np.ndarray
    lam: np.ndarray
    iterations: np.ndarray
    config: GibbsConfig
    truncation: float | None = None
    lag1_autocorr_mu: float = field(init=False)
    lag1_autocorr_lambda: float = field(init=False)

    def __post_init__(self):
        self.lag1_autocorr_mu = _lag1(self.mu)
        self.lag1_autocorr_lambda = _lag1(self.lam)

    @property
    def draws(self) -> np.ndarray:
        return np.column_stack([self.mu, self.lam])

    @property
    def truncated(self) -> bool:
        return self.truncation is not None

    def ergodic_averages(self) -> np.ndarray:
        """Running means of (mu, lambda), for convergence monitoring."""
        k = np.arange(1, self.mu.size + 1)
        return np.column_stack([np.cumsum(self.mu) / k, np.cumsum(self.lam) / k])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "mu", "lambda"])
            for it, m, l in zip(self.iterations, self.mu, self.lam):
                w.writerow([int(it), repr(float(m)), repr(float(l))])


def read_chain_csv(path) -> np.ndarray:
    """Load an exported chain as an (N, 3) array of iter, mu, lambda."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["iter", "mu", "lambda"]:
        raise ValueError(f"{path}: expected header iter,mu,lambda")
    return np.array([[float(v) for v in r] for r in rows[1:]])


def resolve_truncation(ss: SufficientStats, prior: PriorHyper, cfg: GibbsConfig) -> float | None:
    if cfg.truncate is not None:
        return cfg.truncate
    if prior.mu_proper:
        return None
    return cfg.truncate_factor * ss.xbar


def run_gibbs(data, prior: PriorHyper, cfg: GibbsConfig = GibbsConfig(), rng: RngStream | None = None) -> McmcChain:
    """
    Run one chain: lambda | mu, then mu | lambda, from ``cfg.init`` (MLE by
    default). The first ``burn_in`` iterations are dropped, then every
    ``thin``-th state is kept until ``n_keep`` draws are collected.
    """
    ss = data if isinstance(data, SufficientStats) else sufficient_stats(data)
    if rng is None:
        rng = RngStream(cfg.seed)
    init = cfg.init or IgParams(*_mle_pair(ss))
    upper = resolve_truncation(ss, prior, cfg)

    shape = prior.c + ss.n / 2.0
    total = cfg.burn_in + cfg.thin * cfg.n_keep
    mus = np.empty(cfg.n_keep)
    lams = np.empty(cfg.n_keep)
    its = np.empty(cfg.n_keep, dtype=int)
    mu = init.mu
    if upper is not None:
        mu = min(mu, upper)
    j = 0
    gen = rng.generator
    for it in range(1, total + 1):
        _, rate = lambda_conditional_params(mu, ss, prior)
        lam = gen.standard_gamma(shape) / rate
        if not lam > 0:
            raise NumericalError("lambda draw underflowed to zero")
        mu = MuConditional(lam, ss, prior, upper, cfg.grid_points).draw(rng)
        if it > cfg.burn_in and (it - cfg.burn_in) % cfg.thin == 0:
            mus[j] = mu
            lams[j] = lam
            its[j] = it
            j += 1
    return McmcChain(mus, lams, its, cfg, truncation=upper)


def _mle_pair(ss: SufficientStats) -> tuple[float, float]:
    est = mle(ss)
    return est.mu, est.lam


@dataclass(frozen=True)
class ParamSummary:
    mean: float
    variance: float
    mode: float
    q1: float
    median: float
    q3: float
    min: float
    max: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def summarize_draws(x) -> ParamSummary:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise DomainError("need at least two draws")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    spread = float(np.var(x, ddof=1))
    mode = kde_mode(x) if spread > 0 and x.size >= 10 else float(np.median(x))
    return ParamSummary(float(np.mean(x)), spread, mode, float(q1), float(med), float(q3),
                        float(x.min()), float(x.max()))


def posterior_summary(chain: McmcChain) -> dict[str, ParamSummary]:
    """Posterior mean (the Bayes estimate under squared error), variance, KDE mode and quantiles."""
    return {"mu": summarize_draws(chain.mu), "lambda": summarize_draws(chain.lam)}
