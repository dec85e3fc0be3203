"""
Acceptance criteria. Each test prints (and records for the terminal summary)
one PASS/FAIL line with the individual checks that went into it.

Criterion 3 and 5 share a single 500-replication simulation run with the
default design (master seed 0); it dominates the suite's runtime.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate, stats

from igbayes import intervals as iv
from igbayes.distribution import IgParams, cdf_array, pdf, sample_array
from igbayes.estimators import MLE, PointEstimates, mle, sufficient_stats, umvue
from igbayes.gibbs import GibbsConfig, sample_mu_conditional
from igbayes.harness import SimDesign, analyze_dataset, run_simulation
from igbayes.intervals import BootConfig, exact_lambda_ci, exact_mu_ci, hpd_interval
from igbayes.lindley import U_LAMBDA, U_MU, PriorHyper, lindley_estimates, lindley_general, lindley_terms
from igbayes.special import RngStream, chi2_cdf, chi2_quantile, student_t_cdf, student_t_quantile
from oracles import brute_force_min_width, rejection_oracle

SIZES = (15, 20, 30, 50)


class Checks:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.items = []
        self.t0 = time.perf_counter()

    def close(self, name, got, want, tol):
        self.items.append((name, abs(got - want) <= tol, f"{got:.4f} vs {want:.4f} (tol {tol:g})"))

    def rel(self, name, got, want, rtol):
        self.items.append((name, abs(got - want) <= rtol * abs(want), f"{got:.4f} vs {want:.4f} (rel tol {rtol:g})"))

    def true(self, name, ok, detail=""):
        self.items.append((name, bool(ok), detail))

    def report(self, log, budget=None):
        elapsed = time.perf_counter() - self.t0
        if budget is not None:
            self.true("runtime", elapsed < budget, f"{elapsed:.1f} s (budget {budget:g} s)")
        failed = [i for i in self.items if not i[1]]
        status = "PASS" if not failed else "FAIL"
        line = (f"criterion {self.number} [{status}] {self.title}: {len(self.items) - len(failed)}/{len(self.items)} "
                f"checks, {elapsed:.1f} s")
        if failed:
            line += " | failed: " + "; ".join(f"{n}: {d}" for n, _, d in failed)
        print(line)
        log.append(line)
        return failed


@pytest.fixture(scope="session")
def simulation():
    t0 = time.perf_counter()
    report = run_simulation(SimDesign(replications=500))
    return report, time.perf_counter() - t0


def test_criterion_1_deterministic_golden(repair, acceptance_log):
    c = Checks(1, "deterministic golden numbers (repair times)")
    ss = sufficient_stats(repair)
    est = mle(ss)
    c.close("MLE mu", est.mu, 3.6065, 1e-3)
    c.close("MLE lambda", est.lam, 1.6589, 1e-3)
    c.close("UMVUE lambda", umvue(ss).lam, 1.5507, 1e-3)
    lin = lindley_estimates(est, ss.n, PriorHyper.vague())
    c.close("Lindley mu", lin.mu, 4.1178, 1e-3)
    c.close("Lindley lambda", lin.lam, 1.6228, 1e-3)
    emu, elam = exact_mu_ci(ss), exact_lambda_ci(ss)
    c.close("exact mu lower", emu.lower, 2.4998, 1e-3)
    c.close("exact mu upper", emu.upper, 6.4715, 1e-3)
    c.close("exact lambda lower", elam.lower, 1.0229, 1e-3)
    c.close("exact lambda upper", elam.upper, 2.3588, 1e-3)
    c.close("exact mu shape", emu.shape, 2.5888, 1e-3)
    c.close("exact lambda shape", elam.shape, 1.1007, 1e-3)
    assert not c.report(acceptance_log, budget=1.0)


def test_criterion_2_stochastic_golden(repair, acceptance_log):
    c = Checks(2, "stochastic golden numbers (repair times, seed 0)")
    a = analyze_dataset(repair, PriorHyper.vague(), GibbsConfig(), BootConfig())
    post = a.posterior
    c.close("Gibbs mean mu", post["mu"].mean, 4.3999, 0.15)
    c.close("Gibbs mean lambda", post["lambda"].mean, 1.6129, 0.08)
    for p, qs in (("mu", (3.4750, 4.0229, 4.9173)), ("lambda", (1.3791, 1.5953, 1.8092))):
        for name, want in zip(("q1", "median", "q3"), qs):
            c.close(f"{p} {name}", getattr(post[p], name), want, 0.2)
    reference = {
        (iv.BOOT_P, "mu"): (2.2868, 5.4372),
        (iv.BOOT_P, "lambda"): (1.1950, 2.7510),
        (iv.BOOT_T, "mu"): (2.4251, 6.5312),
        (iv.BOOT_T, "lambda"): (0.8674, 2.4426),
    }
    for (m, p), (lo, hi) in reference.items():
        r = a.intervals[(m, p)]
        c.close(f"{m} {p} lower", r.lower, lo, 0.2)
        c.close(f"{m} {p} upper", r.upper, hi, 0.2)
    assert not c.report(acceptance_log, budget=120.0)


def test_criterion_3_simulation_reproduction(simulation, acceptance_log):
    report, elapsed = simulation
    c = Checks(3, "simulation reproduction, 500 replications")
    g = report.point[(30, "GIBBS", "mu")]
    c.close("n=30 Gibbs mu average", g["average"], 3.1106, 0.1)
    c.rel("n=30 Gibbs mu MSE", g["mse"], 0.1868, 0.25)
    m = report.point[(30, "MLE", "lambda")]
    c.close("n=30 MLE lambda average", m["average"], 4.4509, 0.1)
    c.rel("n=30 MLE lambda MSE", m["mse"], 1.6967, 0.25)
    c.close("n=20 exact mu coverage", report.interval[(20, iv.EXACT, "mu")]["coverage"], 0.956, 0.025)
    bp = report.interval[(20, iv.BOOT_P, "lambda")]
    c.close("n=20 boot-p lambda coverage", bp["coverage"], 0.896, 0.03)
    c.close("n=20 boot-p lambda MissRight", bp["miss_right"], 0.0, 0.005)
    c.close("n=20 HPD lambda coverage", report.interval[(20, iv.HPD, "lambda")]["coverage"], 0.981, 0.02)
    c.true("no failed replications", sum(report.failures.values()) == 0, str(report.failures))
    c.true("runtime", elapsed < 1800, f"{elapsed:.0f} s for 2000 cells on this machine (target 1800 s)")
    assert not c.report(acceptance_log)


def test_criterion_4_property_suites(repair_ss, simulation, acceptance_log):
    c = Checks(4, "property suites")
    worst = 0.0
    for df in (1, 5, 14, 19, 29, 45, 49):
        for p in (0.001, 0.01, 0.025, 0.5, 0.975, 0.99, 0.999):
            worst = max(worst, abs(chi2_cdf(chi2_quantile(p, df), df) - p),
                        abs(student_t_cdf(student_t_quantile(p, df), df) - p))
    c.true("quantile round trips <= 1e-9", worst <= 1e-9, f"max error {worst:.2e}")

    worst = 0.0
    for mu in (0.5, 1.0, 3.0, 10.0):
        for lam in (0.5, 1.0, 4.0, 10.0):
            p = IgParams(mu, lam)
            f = lambda x: pdf(x, p)
            tot = integrate.quad(f, 0, mu, epsabs=1e-13, limit=200)[0] + integrate.quad(f, mu, np.inf, epsabs=1e-13, limit=200)[0]
            worst = max(worst, abs(tot - 1))
    c.true("IG pdf integrates to 1 +- 1e-6", worst <= 1e-6, f"max error {worst:.2e}")

    x = sample_array(3.0, 4.0, RngStream(2), 10_000)
    ks = stats.kstest(x, lambda v: cdf_array(v, IgParams(3.0, 4.0))).statistic
    c.true("sampler vs CDF KS < 0.02", ks < 0.02, f"KS {ks:.4f}")

    worst = 0.0
    for lam in (0.5, 1.6, 5.0):
        for a, b, upper in ((0.5, 0.3, None), (1.0, 0.5, None), (6.0, 2.0, None), (1.0, 0.0, 10.0)):
            ours = sample_mu_conditional(lam, repair_ss, PriorHyper(a, b, 1, 1), RngStream(3), upper=upper, size=10_000)
            ref = rejection_oracle(lam, repair_ss, a, b, upper, 10_000, seed=4)
            worst = max(worst, stats.ks_2samp(ours, ref).statistic)
    c.true("mu-conditional vs rejection oracle KS < 0.03", worst < 0.03, f"max KS {worst:.4f}")

    rng = np.random.default_rng(5)
    worst_gen = worst_vague = worst_ratio = 0.0
    for _ in range(100):
        m, l = rng.uniform(0.1, 10, 2)
        n = int(rng.integers(4, 200))
        prior = PriorHyper(*rng.uniform(0, 8, 4))
        e = PointEstimates(m, l, MLE)
        t = lindley_terms(e, n, prior)
        closed = lindley_estimates(e, n, prior)
        worst_gen = max(worst_gen, abs(lindley_general(U_MU, t) - closed.mu) / max(1, abs(closed.mu)),
                        abs(lindley_general(U_LAMBDA, t) - closed.lam) / max(1, abs(closed.lam)))
        v = lindley_estimates(e, n, PriorHyper.vague())
        worst_vague = max(worst_vague, abs(v.mu - (m + 3 * m * m / (n * l))) / m, abs(v.lam - (n - 1) * l / n) / l)
        sample = sample_array(m, l, RngStream(6, _), n)
        worst_ratio = max(worst_ratio, abs(umvue(sample).lam / mle(sample).lam - (n - 3) / n))
    c.true("Lindley general engine == closed forms", worst_gen < 1e-13, f"max rel diff {worst_gen:.1e}")
    c.true("vague-prior reduction == closed forms", worst_vague < 1e-14, f"max rel diff {worst_vague:.1e}")
    c.true("UMVUE/MLE lambda ratio == (n-3)/n", worst_ratio < 1e-14, f"max diff {worst_ratio:.1e}")

    ok = True
    for k in range(20):
        d = RngStream(7, k).gamma(1.5, 1.0, 150)
        r = hpd_interval(d, 0.9)
        w, lo, hi = brute_force_min_width(d, 0.9)
        ok &= r.width == w and (r.lower, r.upper) == (lo, hi)
    c.true("HPD minimality vs exhaustive scan", ok)

    report, _ = simulation
    ok = all(cell["coverage"] + cell["miss_left"] + cell["miss_right"] == 1.0
             and cell["covered_count"] + cell["miss_left_count"] + cell["miss_right_count"] == report.valid[n]
             for (n, _, _), cell in report.interval.items())
    c.true("coverage-count conservation", ok)

    small = SimDesign(sample_sizes=(12, 20), replications=3, mcmc=GibbsConfig(burn_in=50, n_keep=100),
                      boot=BootConfig(B=100, B1=50, B2=10), master_seed=8)
    one, two = run_simulation(small).to_json(), run_simulation(replace(small, workers=2)).to_json()
    c.true("bit-exact reproducibility across worker counts", one == two and one == run_simulation(small).to_json())
    assert not c.report(acceptance_log)


def test_criterion_5_directional(simulation, acceptance_log):
    report, _ = simulation
    c = Checks(5, "directional claims, 500 replications")
    for n in SIZES:
        g, u, m = (report.point[(n, e, "lambda")]["mse"] for e in ("GIBBS", "UMVUE", "MLE"))
        c.true(f"n={n} MSE lambda Gibbs < UMVUE < MLE", g < u < m, f"{g:.4f} < {u:.4f} < {m:.4f}")
    for meth in (iv.EXACT, iv.BOOT_P, iv.BOOT_T, iv.HPD):
        for p in iv.PARAMS:
            widths = [report.interval[(n, meth, p)]["width"] for n in SIZES]
            c.true(f"{meth} {p} width shrinks", all(a > b for a, b in zip(widths, widths[1:])),
                   " > ".join(f"{w:.3f}" for w in widths))
            dev = [abs(report.interval[(n, meth, p)]["shape"] - 1.0) for n in SIZES]
            c.true(f"{meth} {p} shape moves toward 1", all(a > b for a, b in zip(dev, dev[1:])),
                   "|shape-1|: " + " > ".join(f"{d:.3f}" for d in dev))
    assert not c.report(acceptance_log)
