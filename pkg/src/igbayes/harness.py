"""
Monte Carlo study and single-dataset analysis.

``run_simulation`` repeats, for each sample size, the full estimation
pipeline on samples drawn from known IG parameters and aggregates bias/MSE
of the point estimators and coverage/shape of the interval methods.
``analyze_dataset`` runs the same pipeline once on observed data and
collects everything needed for tables and plots.

Replication ``r`` at sample size ``n`` owns ``RngStream(master_seed, r).split(n)``,
so results do not depend on scheduling or worker count.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import intervals as iv
from .distribution import IgParams, cdf_array, sample_array
from .errors import ConfigError, DataError, IgBayesError
from .estimators import GIBBS, LINDLEY, MLE, UMVUE, PointEstimates, as_sample, mle, sufficient_stats, umvue
from .gibbs import GibbsConfig, McmcChain, ParamSummary, posterior_summary, run_gibbs
from .kde import kde_curve
from .lindley import PriorHyper, lindley_estimates
from .special import RngStream

log = logging.getLogger(__name__)

ESTIMATORS = (MLE, UMVUE, LINDLEY, GIBBS)
METHODS = (iv.EXACT, iv.BOOT_P, iv.BOOT_T, iv.HPD)
PARAMS = iv.PARAMS


def load_data(path) -> np.ndarray:
    """Read one positive value per line; blank lines and ``#`` comments are skipped."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise DataError(f"{path}:{lineno}: not a number: {text!r}") from None
    return as_sample(values)


def repair_times() -> np.ndarray:
    """The 46 transceiver repair times shipped with the package."""
    return load_data(Path(__file__).with_name("data") / "repair_times.txt")


@dataclass(frozen=True)
class SimDesign:
    true_params: IgParams = IgParams(3.0, 4.0)
    sample_sizes: tuple[int, ...] = (15, 20, 30, 50)
    prior: PriorHyper = PriorHyper(6.0, 2.0, 5.0, 1.25)
    replications: int = 1000
    level: float = 0.95
    mcmc: GibbsConfig = GibbsConfig()
    boot: iv.BootConfig = iv.BootConfig()
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.replications < 2:
            raise ConfigError("replications must be >= 2")
        if not self.sample_sizes or min(self.sample_sizes) < 4:
            raise ConfigError("sample sizes must all be >= 4")
        if not 0 < self.level < 1:
            raise ConfigError("level must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class Replicate:
    n: int
    rep: int
    estimates: dict[str, PointEstimates] = field(default_factory=dict)
    intervals: dict[tuple[str, str], iv.IntervalResult] = field(default_factory=dict)
    error: str | None = None
    retried: bool = False


def _estimate_everything(x, design: SimDesign, rng: RngStream):
    ss = sufficient_stats(x)
    est_mle = mle(ss)
    estimates = {
        MLE: est_mle,
        UMVUE: umvue(ss),
        LINDLEY: lindley_estimates(est_mle, ss.n, design.prior),
    }
    chain = run_gibbs(ss, design.prior, design.mcmc, rng.split(1))
    estimates[GIBBS] = PointEstimates(float(chain.mu.mean()), float(chain.lam.mean()), GIBBS)
    ivs = {(iv.EXACT, "mu"): iv.exact_mu_ci(ss, design.level), (iv.EXACT, "lambda"): iv.exact_lambda_ci(ss, design.level)}
    ivs.update(iv.bootstrap_intervals(ss, design.level, design.boot, rng.split(2)))
    ivs[(iv.HPD, "mu")] = iv.hpd_interval(chain.mu, design.level)
    ivs[(iv.HPD, "lambda")] = iv.hpd_interval(chain.lam, design.level)
    return estimates, ivs


def run_replicate(design: SimDesign, n: int, rep: int) -> Replicate:
    """One replication; a failure is retried once on a fresh stream, then recorded."""
    base = RngStream(design.master_seed, rep).split(n)
    out = Replicate(n, rep)
    for attempt in range(2):
        rng = base if attempt == 0 else base.split(1_000_003)
        try:
            x = sample_array(design.true_params.mu, design.true_params.lam, rng.split(0), n)
            out.estimates, out.intervals = _estimate_everything(x, design, rng)
            out.error = None
            return out
        except (IgBayesError, ArithmeticError) as exc:
            out.error = f"{type(exc).__name__}: {exc}"
            out.retried = True
            log.warning("replication n=%d rep=%d attempt %d failed: %s", n, rep, attempt, exc)
    return out


def _run_cell(args) -> Replicate:
    return run_replicate(*args)


@dataclass
class SimReport:
    """
    Aggregated study output.

    ``point[(n, estimator, param)]`` holds ``average`` and ``mse``;
    ``interval[(n, method, param)]`` holds average endpoints, average shape,
    coverage / miss_left / miss_right (fractions and counts), ``unbounded_count``
    and ``shape_count``. Unbounded intervals are left out of endpoint and
    shape averages but still classified for coverage.
    """

    design: SimDesign
    point: dict[tuple[int, str, str], dict[str, float]]
    interval: dict[tuple[int, str, str], dict[str, float]]
    valid: dict[int, int]
    failures: dict[int, int]

    def rows(self) -> list[tuple[int, str, str, str, float]]:
        out = []
        for (n, est, param), m in self.point.items():
            out += [(n, est, param, k, v) for k, v in m.items()]
        for (n, meth, param), m in self.interval.items():
            out += [(n, meth, param, k, v) for k, v in m.items()]
        for n in self.valid:
            out.append((n, "ALL", "-", "valid_replications", self.valid[n]))
            out.append((n, "ALL", "-", "failed_replications", self.failures[n]))
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "estimator_or_method", "parameter", "metric", "value"])
            for row in self.rows():
                w.writerow([row[0], row[1], row[2], row[3], repr(row[4]) if isinstance(row[4], float) else row[4]])

    def to_dict(self) -> dict[str, Any]:
        nested: dict[str, Any] = {}
        for n, name, param, metric, value in self.rows():
            nested.setdefault(str(n), {}).setdefault(name, {}).setdefault(param, {})[metric] = value
        return {"design": design_to_dict(self.design), "results": nested}

    def to_json(self, path=None) -> str:
        text = json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    return obj


def _mean(values) -> float:
    return math.fsum(values) / len(values) if values else math.nan


def aggregate(design: SimDesign, reps: list[Replicate]) -> SimReport:
    truth = {"mu": design.true_params.mu, "lambda": design.true_params.lam}
    point, interval, valid, failures = {}, {}, {}, {}
    for n in design.sample_sizes:
        ok = [r for r in reps if r.n == n and r.error is None]
        ok.sort(key=lambda r: r.rep)
        valid[n] = len(ok)
        failures[n] = sum(1 for r in reps if r.n == n and r.error is not None)
        if not ok:
            continue
        for est in ESTIMATORS:
            for param in PARAMS:
                vals = [getattr(r.estimates[est], "mu" if param == "mu" else "lam") for r in ok]
                point[(n, est, param)] = {
                    "average": _mean(vals),
                    "mse": _mean([(v - truth[param]) ** 2 for v in vals]),
                }
        for meth in METHODS:
            for param in PARAMS:
                ivs = [r.intervals[(meth, param)] for r in ok]
                tags = [iv.classify_coverage(i, truth[param]) for i in ivs]
                bounded = [i for i in ivs if not i.unbounded]
                shapes = [i.shape for i in ivs if i.shape is not None]
                counts = {t: tags.count(t) for t in (iv.COVERED, iv.MISS_LEFT, iv.MISS_RIGHT)}
                interval[(n, meth, param)] = {
                    "lower": _mean([i.lower for i in bounded]),
                    "upper": _mean([i.upper for i in bounded]),
                    "width": _mean([i.width for i in bounded]),
                    "shape": _mean(shapes),
                    "coverage": counts[iv.COVERED] / len(ok),
                    "miss_left": counts[iv.MISS_LEFT] / len(ok),
                    "miss_right": counts[iv.MISS_RIGHT] / len(ok),
                    "covered_count": counts[iv.COVERED],
                    "miss_left_count": counts[iv.MISS_LEFT],
                    "miss_right_count": counts[iv.MISS_RIGHT],
                    "unbounded_count": len(ivs) - len(bounded),
                    "shape_count": len(shapes),
                }
    return SimReport(design, point, interval, valid, failures)


def run_simulation(design: SimDesign, progress=None) -> SimReport:
    """Run every (n, replication) cell, in parallel when ``design.workers > 1``."""
    tasks = [(design, n, r) for n in design.sample_sizes for r in range(design.replications)]
    if design.workers == 1:
        reps = []
        for k, t in enumerate(tasks):
            reps.append(run_replicate(*t))
            if progress:
                progress(k + 1, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=design.workers) as pool:
            reps = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (8 * design.workers))))
    return aggregate(design, reps)


# ---------------------------------------------------------------- analysis


@dataclass
class Analysis:
    data: np.ndarray
    prior: PriorHyper
    estimates: dict[str, PointEstimates]
    chain: McmcChain
    posterior: dict[str, ParamSummary]
    intervals: dict[tuple[str, str], iv.IntervalResult]
    kde: dict[str, np.ndarray]
    cdf: dict[str, np.ndarray]
    level: float

    @property
    def truncation(self) -> float | None:
        return self.chain.truncation

    def to_dict(self) -> dict[str, Any]:
        return _jsonable({
            "n": int(self.data.size),
            "prior": dict(zip("abcd", self.prior.as_tuple())),
            "level": self.level,
            "truncation": self.truncation,
            "estimates": {k: {"mu": e.mu, "lambda": e.lam, "valid": e.valid} for k, e in self.estimates.items()},
            "posterior": {k: s.as_dict() for k, s in self.posterior.items()},
            "lag1_autocorr": {"mu": self.chain.lag1_autocorr_mu, "lambda": self.chain.lag1_autocorr_lambda},
            "intervals": {
                f"{m}:{p}": {"lower": i.lower, "upper": i.upper, "shape": i.shape, "center": i.center}
                for (m, p), i in self.intervals.items()
            },
        })

    def write(self, outdir) -> list[Path]:
        """Write summary JSON, chain CSV and two-column curve CSVs; returns the paths."""
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        p = out / "analysis.json"
        p.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        paths.append(p)
        p = out / "chain.csv"
        self.chain.to_csv(p)
        paths.append(p)
        curves = {f"kde_{k}.csv": (("x", "density"), v) for k, v in self.kde.items()}
        curves["ecdf.csv"] = (("x", "ecdf"), np.column_stack([self.cdf["data"], self.cdf["ecdf"]]))
        for key in ("mle", "posterior_mean", "mode_mean"):
            curves[f"cdf_{key}.csv"] = (("x", "cdf"), np.column_stack([self.cdf["grid"], self.cdf[key]]))
        for name, (header, arr) in curves.items():
            p = out / name
            _write_two_column(p, header, arr)
            paths.append(p)
        return paths


def _write_two_column(path: Path, header, arr: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for a, b in arr:
            w.writerow([repr(float(a)), repr(float(b))])


def analyze_dataset(data, prior: PriorHyper | None = None, cfg: GibbsConfig = GibbsConfig(),
                    boot: iv.BootConfig = iv.BootConfig(), level: float = 0.95, grid_points: int = 512) -> Analysis:
    """
    Classical, Lindley and Gibbs estimates, posterior summaries, all four
    interval methods, marginal posterior KDE curves, and the empirical CDF
    against fitted CDFs under (MLE), (posterior means) and (posterior mode
    of mu, posterior mean of lambda). The Gibbs chain uses
    ``RngStream(cfg.seed, 0)``, the bootstrap ``RngStream(boot.seed, 1)``.
    """
    x = as_sample(data, min_size=4)
    prior = prior or PriorHyper.vague()
    ss = sufficient_stats(x)
    est_mle = mle(ss)
    chain = run_gibbs(ss, prior, cfg, RngStream(cfg.seed, 0))
    post = posterior_summary(chain)
    estimates = {
        MLE: est_mle,
        UMVUE: umvue(ss),
        LINDLEY: lindley_estimates(est_mle, ss.n, prior),
        GIBBS: PointEstimates(post["mu"].mean, post["lambda"].mean, GIBBS),
    }
    ivs = {(iv.EXACT, "mu"): iv.exact_mu_ci(ss, level), (iv.EXACT, "lambda"): iv.exact_lambda_ci(ss, level)}
    ivs.update(iv.bootstrap_intervals(ss, level, boot, RngStream(boot.seed, 1)))
    ivs[(iv.HPD, "mu")] = iv.hpd_interval(chain.mu, level)
    ivs[(iv.HPD, "lambda")] = iv.hpd_interval(chain.lam, level)

    xs = np.sort(x)
    grid = np.linspace(xs[0] / 2.0, xs[-1] * 1.1, grid_points)
    fits = {
        "mle": IgParams(est_mle.mu, est_mle.lam),
        "posterior_mean": IgParams(post["mu"].mean, post["lambda"].mean),
        "mode_mean": IgParams(post["mu"].mode, post["lambda"].mean),
    }
    cdf = {"data": xs, "ecdf": np.arange(1, xs.size + 1) / xs.size, "grid": grid}
    cdf.update({k: cdf_array(grid, p) for k, p in fits.items()})
    kde = {"mu": kde_curve(chain.mu, grid_points), "lambda": kde_curve(chain.lam, grid_points)}
    return Analysis(x, prior, estimates, chain, post, ivs, kde, cdf, level)


# ------------------------------------------------------------------ config

_INT_KEYS = {"replications", "burn_in", "thin", "n_keep", "grid_points", "B", "B1", "B2", "master_seed", "workers"}
_FLOAT_KEYS = {"mu", "lambda", "level", "truncate", "truncate_factor"}
_ALIASES = {"seed": "master_seed", "lam": "lambda", "keep": "n_keep", "burn-in": "burn_in"}


def parse_config(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines (TOML-like; ``[section]`` headers and ``#`` comments ignored)."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        value = value.strip("\"'").strip("[]()")
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = None if value.lower() in ("none", "") else float(value)
            elif key == "sample_sizes":
                out[key] = tuple(int(v) for v in value.split(",") if v.strip())
            elif key == "prior":
                out[key] = PriorHyper.parse(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
    return out


def design_from_config(cfg: dict[str, Any], base: SimDesign = SimDesign()) -> SimDesign:
    try:
        mcmc = replace(base.mcmc, **{k: cfg[k] for k in ("burn_in", "thin", "n_keep", "truncate", "truncate_factor",
                                                          "grid_points") if k in cfg})
        boot = replace(base.boot, **{k: cfg[k] for k in ("B", "B1", "B2") if k in cfg})
        truth = IgParams(cfg.get("mu", base.true_params.mu), cfg.get("lambda", base.true_params.lam))
        top = {k: cfg[k] for k in ("sample_sizes", "prior", "replications", "level", "master_seed", "workers") if k in cfg}
        return replace(base, true_params=truth, mcmc=mcmc, boot=boot, **top)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path) -> dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def design_to_dict(design: SimDesign) -> dict[str, Any]:
    return {
        "mu": design.true_params.mu,
        "lambda": design.true_params.lam,
        "sample_sizes": list(design.sample_sizes),
        "prior": list(design.prior.as_tuple()),
        "replications": design.replications,
        "level": design.level,
        "mcmc": {f.name: getattr(design.mcmc, f.name) for f in fields(design.mcmc) if f.name != "init"},
        "boot": asdict(design.boot),
        "master_seed": design.master_seed,
    }
