import json
import math

import numpy as np
import pytest

from igbayes import harness
from igbayes import intervals as iv
from igbayes.errors import ConfigError, DataError, NumericalError
from igbayes.gibbs import GibbsConfig
from igbayes.harness import (
    ESTIMATORS,
    METHODS,
    SimDesign,
    analyze_dataset,
    design_from_config,
    load_data,
    parse_config,
    run_replicate,
    run_simulation,
)
from igbayes.intervals import BootConfig
from igbayes.lindley import PriorHyper

SMALL = SimDesign(
    sample_sizes=(10, 25),
    replications=4,
    mcmc=GibbsConfig(burn_in=50, thin=2, n_keep=200),
    boot=BootConfig(B=200, B1=100, B2=20),
    master_seed=11,
)


@pytest.fixture(scope="module")
def small_report():
    return run_simulation(SMALL)


class TestData:
    def test_repair_file(self, repair):
        assert repair.size == 46 and repair.min() > 0

    def test_comments_and_blanks(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("# header\n1.5\n\n2.5  # trailing\n3\n")
        assert list(load_data(p)) == [1.5, 2.5, 3.0]

    @pytest.mark.parametrize("text", ["1\nabc\n", "1\n-2\n", "1\n"])
    def test_bad(self, tmp_path, text):
        p = tmp_path / "d.txt"
        p.write_text(text)
        with pytest.raises(DataError):
            load_data(p)


class TestSimulation:
    def test_cells_complete(self, small_report):
        r = small_report
        assert r.valid == {10: 4, 25: 4} and r.failures == {10: 0, 25: 0}
        for n in SMALL.sample_sizes:
            for est in ESTIMATORS:
                for p in iv.PARAMS:
                    cell = r.point[(n, est, p)]
                    assert math.isfinite(cell["average"]) and cell["mse"] >= 0

    def test_coverage_conservation(self, small_report):
        for cell in small_report.interval.values():
            assert cell["coverage"] + cell["miss_left"] + cell["miss_right"] == 1.0
            assert cell["covered_count"] + cell["miss_left_count"] + cell["miss_right_count"] == 4
            assert cell["shape_count"] + cell["unbounded_count"] <= 4

    def test_mse_matches_replicates(self):
        reps = [run_replicate(SMALL, 10, r) for r in range(SMALL.replications)]
        vals = np.array([r.estimates["MLE"].lam for r in reps])
        rep = harness.aggregate(SMALL, reps)
        assert rep.point[(10, "MLE", "lambda")]["average"] == pytest.approx(vals.mean(), rel=1e-14)
        assert rep.point[(10, "MLE", "lambda")]["mse"] == pytest.approx(np.mean((vals - 4.0) ** 2), rel=1e-14)

    def test_smoke_two_replications(self):
        d = SimDesign(sample_sizes=(15,), replications=2, mcmc=GibbsConfig(burn_in=10, n_keep=50),
                      boot=BootConfig(B=50, B1=20, B2=5))
        rep = run_simulation(d)
        for (n, m, p), cell in rep.interval.items():
            assert cell["coverage"] + cell["miss_left"] + cell["miss_right"] == 1.0

    def test_deterministic_across_runs_and_workers(self, small_report):
        again = run_simulation(SMALL).to_json()
        assert again == small_report.to_json()
        from dataclasses import replace
        par = run_simulation(replace(SMALL, workers=2)).to_json()
        # the design echo does not carry the worker count, so the documents must be byte-identical
        assert par == small_report.to_json()

    def test_retry_then_exclude(self, monkeypatch):
        real = harness._estimate_everything
        attempts = {}

        def flaky(x, design, rng):
            key = (x.size, rng.path)
            attempts[key] = attempts.get(key, 0) + 1
            if x.size == 10:
                raise NumericalError("always fails at n=10")
            return real(x, design, rng)

        monkeypatch.setattr(harness, "_estimate_everything", flaky)
        rep = run_simulation(SMALL)
        assert rep.failures[10] == 4 and rep.valid[10] == 0
        assert rep.failures[25] == 0 and rep.valid[25] == 4
        assert sum(v for (n, _), v in attempts.items() if n == 10) == 8
        assert not any(k[0] == 10 for k in rep.point)

    def test_export(self, small_report, tmp_path):
        small_report.to_csv(tmp_path / "r.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0] == "n,estimator_or_method,parameter,metric,value"
        assert any(l.startswith("25,GIBBS,mu,mse,") for l in lines)
        doc = json.loads(small_report.to_json(tmp_path / "r.json"))
        assert doc["results"]["10"]["HPD"]["lambda"]["coverage"] == small_report.interval[(10, "HPD", "lambda")]["coverage"]
        assert doc["design"]["prior"] == [6.0, 2.0, 5.0, 1.25]
        assert json.loads((tmp_path / "r.json").read_text()) == doc

    def test_design_validation(self):
        with pytest.raises(ConfigError):
            SimDesign(replications=1)
        with pytest.raises(ConfigError):
            SimDesign(sample_sizes=(3,))


class TestConfig:
    TEXT = """
    # study settings
    [design]
    mu = 2.5
    lambda = 6
    sample_sizes = [15, 30]
    prior = "6, 2, 5, 1.25"
    replications = 500
    seed = 7
    [mcmc]
    burn_in = 200
    keep = 800
    truncate = none
    [boot]
    B2 = 50
    """

    def test_parse(self):
        cfg = parse_config(self.TEXT)
        assert cfg["mu"] == 2.5 and cfg["lambda"] == 6.0
        assert cfg["sample_sizes"] == (15, 30)
        assert cfg["prior"] == PriorHyper(6, 2, 5, 1.25)
        assert cfg["master_seed"] == 7 and cfg["n_keep"] == 800 and cfg["truncate"] is None

    def test_design(self):
        d = design_from_config(parse_config(self.TEXT))
        assert d.true_params.mu == 2.5 and d.replications == 500
        assert d.mcmc.burn_in == 200 and d.mcmc.n_keep == 800 and d.mcmc.thin == 5
        assert d.boot.B2 == 50 and d.boot.B1 == 1000

    def test_defaults(self):
        d = design_from_config({})
        assert d == SimDesign()
        assert d.prior == PriorHyper(6, 2, 5, 1.25) and d.sample_sizes == (15, 20, 30, 50)

    @pytest.mark.parametrize("text", ["foo = 1", "mu 3", "replications = x", "thin = 0", "level = 2", "prior = 1,2"])
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            design_from_config(parse_config(text))


@pytest.fixture(scope="module")
def analysis(repair):
    return analyze_dataset(repair, PriorHyper.vague(), GibbsConfig(), BootConfig(B=400, B1=200, B2=30))


class TestAnalysis:
    def test_point_block(self, analysis):
        e = analysis.estimates
        assert (e["MLE"].mu, e["MLE"].lam) == pytest.approx((3.6065, 1.6589), abs=5e-4)
        assert e["UMVUE"].lam == pytest.approx(1.5507, abs=5e-4)
        assert (e["LINDLEY"].mu, e["LINDLEY"].lam) == pytest.approx((4.1178, 1.6228), abs=5e-4)
        assert e["GIBBS"].mu == analysis.posterior["mu"].mean

    def test_intervals_block(self, analysis):
        assert set(analysis.intervals) == {(m, p) for m in METHODS for p in iv.PARAMS}
        ex = analysis.intervals[(iv.EXACT, "mu")]
        assert ex.shape == pytest.approx(2.5888, abs=1e-3)

    def test_truncation_flagged(self, analysis):
        assert analysis.truncation == pytest.approx(3 * 3.6065, abs=1e-3)
        assert analysis.to_dict()["truncation"] == analysis.truncation

    def test_kde_mode(self, analysis):
        k = analysis.kde["mu"]
        assert k[np.argmax(k[:, 1]), 0] == pytest.approx(3.75, abs=0.2)

    def test_cdf_curves(self, analysis):
        c = analysis.cdf
        assert c["ecdf"][-1] == 1.0 and np.all(np.diff(c["data"]) >= 0)
        for key in ("mle", "posterior_mean", "mode_mean"):
            assert np.all(np.diff(c[key]) >= 0) and 0 <= c[key][0] < c[key][-1] <= 1

    def test_write(self, analysis, tmp_path):
        paths = analysis.write(tmp_path)
        names = {p.name for p in paths}
        assert {"analysis.json", "chain.csv", "kde_mu.csv", "kde_lambda.csv", "ecdf.csv", "cdf_mle.csv",
                "cdf_posterior_mean.csv", "cdf_mode_mean.csv"} <= names
        assert (tmp_path / "kde_mu.csv").read_text().splitlines()[0] == "x,density"
        doc = json.loads((tmp_path / "analysis.json").read_text())
        assert doc["n"] == 46 and "HPD:mu" in doc["intervals"]
