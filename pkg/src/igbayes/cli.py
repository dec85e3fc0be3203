"""
Command-line entry point (``igbayes``).

Exit codes: 0 success, 2 data error, 3 config error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import intervals as iv
from .errors import ConfigError, DataError, DomainError, ImproperConditionalError, NumericalError
from .estimators import mle, sufficient_stats, umvue
from .gibbs import GibbsConfig, posterior_summary, run_gibbs
from .harness import analyze_dataset, design_from_config, load_config, load_data, run_simulation
from .lindley import PriorHyper, lindley_estimates
from .special import RngStream

EXIT_OK, EXIT_DATA, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3, 4

_METHODS = {"hpd": iv.HPD, "exact": iv.EXACT, "boot-p": iv.BOOT_P, "boot-t": iv.BOOT_T}


def _prior(text: str) -> PriorHyper:
    try:
        return PriorHyper.parse(text)
    except ValueError as exc:
        raise ConfigError(f"bad --prior {text!r}: {exc}") from None


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def _est(e) -> dict:
    return {"mu": e.mu, "lambda": e.lam}


def _gibbs_cfg(args) -> GibbsConfig:
    try:
        return GibbsConfig(burn_in=args.burn_in, thin=args.thin, n_keep=args.keep, seed=args.seed, truncate=args.truncate)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_fit(args) -> None:
    ss = sufficient_stats(load_data(args.datafile))
    out = {"n": ss.n, "MLE": _est(mle(ss))}
    if ss.n >= 4:
        out["UMVUE"] = _est(umvue(ss))
    _emit(out)


def cmd_lindley(args) -> None:
    ss = sufficient_stats(load_data(args.datafile))
    est = lindley_estimates(mle(ss), ss.n, _prior(args.prior))
    _emit({"n": ss.n, "LINDLEY": _est(est), "valid": est.valid})


def cmd_gibbs(args) -> None:
    ss = sufficient_stats(load_data(args.datafile))
    cfg = _gibbs_cfg(args)
    chain = run_gibbs(ss, _prior(args.prior), cfg, RngStream(cfg.seed, 0))
    if args.out:
        chain.to_csv(args.out)
    _emit({
        "truncation": chain.truncation,
        "lag1_autocorr": {"mu": chain.lag1_autocorr_mu, "lambda": chain.lag1_autocorr_lambda},
        "posterior": {k: s.as_dict() for k, s in posterior_summary(chain).items()},
    })


def cmd_intervals(args) -> None:
    x = load_data(args.datafile)
    method = _METHODS[args.method]
    if method == iv.EXACT:
        res = {"mu": iv.exact_mu_ci(x, args.level), "lambda": iv.exact_lambda_ci(x, args.level)}
    elif method == iv.HPD:
        cfg = _gibbs_cfg(args)
        chain = run_gibbs(x, _prior(args.prior), cfg, RngStream(cfg.seed, 0))
        res = {"mu": iv.hpd_interval(chain.mu, args.level), "lambda": iv.hpd_interval(chain.lam, args.level)}
    else:
        boot = iv.BootConfig(B=args.B, B1=args.B1, B2=args.B2, seed=args.seed)
        both = iv.bootstrap_intervals(x, args.level, boot, RngStream(boot.seed, 1))
        res = {p: both[(method, p)] for p in iv.PARAMS}
    _emit({p: {"lower": r.lower, "upper": r.upper, "shape": r.shape, "center": r.center} for p, r in res.items()}
          | {"method": method, "level": args.level})


def cmd_simulate(args) -> None:
    design = design_from_config(load_config(args.config))
    if args.workers:
        design = replace(design, workers=args.workers)
    report = run_simulation(design)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / "report.csv")
    report.to_json(out / "report.json")
    print(f"wrote {out / 'report.csv'} and {out / 'report.json'}")


def cmd_analyze(args) -> None:
    cfg = load_config(args.config) if args.config else {}
    prior = cfg.get("prior", PriorHyper.vague())
    design = design_from_config(cfg)
    gibbs_cfg = replace(design.mcmc, seed=cfg.get("master_seed", design.mcmc.seed))
    boot = replace(design.boot, seed=cfg.get("master_seed", design.boot.seed))
    analysis = analyze_dataset(load_data(args.datafile), prior, gibbs_cfg, boot, level=design.level)
    if args.out:
        for p in analysis.write(args.out):
            logging.getLogger(__name__).info("wrote %s", p)
    _emit(analysis.to_dict())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="igbayes", description="Classical and Bayesian inference for IG(mu, lambda).")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="MLE and UMVUE")
    p.add_argument("datafile")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("lindley", help="Lindley approximate posterior means")
    p.add_argument("datafile")
    p.add_argument("--prior", default="1,0,0,0", help="a,b,c,d (default: vague 1,0,0,0)")
    p.set_defaults(func=cmd_lindley)

    def gibbs_opts(p):
        p.add_argument("--prior", default="1,0,0,0")
        p.add_argument("--burn-in", type=int, default=1000)
        p.add_argument("--thin", type=int, default=5)
        p.add_argument("--keep", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--truncate", type=float, default=None, help="upper bound M for mu (improper priors)")

    p = sub.add_parser("gibbs", help="Gibbs sampler posterior summary")
    p.add_argument("datafile")
    gibbs_opts(p)
    p.add_argument("--out", help="write the chain as CSV")
    p.set_defaults(func=cmd_gibbs)

    p = sub.add_parser("intervals", help="interval estimates")
    p.add_argument("datafile")
    p.add_argument("--method", choices=sorted(_METHODS), default="exact")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--B1", type=int, default=1000)
    p.add_argument("--B2", type=int, default=100)
    gibbs_opts(p)
    p.set_defaults(func=cmd_intervals)

    p = sub.add_parser("simulate", help="Monte Carlo study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="sim_out")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="full analysis of one dataset")
    p.add_argument("datafile")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None, help="directory for JSON/CSV outputs")
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (ConfigError, ImproperConditionalError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DomainError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
