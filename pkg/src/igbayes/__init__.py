"""Classical and Bayesian estimation for the inverse Gaussian distribution IG(mu, lambda)."""

from .distribution import IgParams, cdf, cdf_array, logpdf, pdf, sample, sample_array
from .errors import (
    ConfigError,
    DataError,
    DegenerateSampleError,
    DomainError,
    IgBayesError,
    ImproperConditionalError,
    InsufficientSampleError,
    NumericalError,
)
from .estimators import PointEstimates, SufficientStats, mle, sufficient_stats, umvue
from .gibbs import GibbsConfig, McmcChain, posterior_summary, run_gibbs
from .harness import SimDesign, SimReport, analyze_dataset, load_data, repair_times, run_simulation
from .intervals import (
    BootConfig,
    IntervalResult,
    boot_p_ci,
    boot_t_ci,
    bootstrap_intervals,
    classify_coverage,
    exact_lambda_ci,
    exact_mu_ci,
    hpd_interval,
)
from .kde import kde_curve
from .lindley import PriorHyper, lindley_estimates, lindley_general
from .special import RngStream

__version__ = "0.1.0"
