"""Topp-Leone exponential and q-exponential lifetime distributions with
minimum-distance estimation and a seeded estimator-comparison harness."""

__version__ = "0.1.0"

from .data import SortedSample
from .distributions import (Support, TleParams, TlqeParams, cdf_tle,
                            cdf_tlqe, exponential_cdf, pdf_tle, pdf_tlqe,
                            qexponential_cdf, quantile_tle, quantile_tlqe,
                            sample, support, tl_transform_cdf)
from .estimators import FitRequest, FitResult, Method, fit, fit_mle
from .montecarlo import StudyConfig, StudyReport, run_study
from .objectives import (ObjectiveKind, ObjectiveValue, ad_value, cvm_value,
                         gradient, ls_value, objective_value, wls_value)
from .optimize import (NoFeasibleStartError, OptimizeOutcome, OptimizerConfig,
                       ParamSpace, default_initial_guesses, minimize)

__all__ = [
    "__version__",
    "SortedSample",
    "TleParams", "TlqeParams", "Support",
    "tl_transform_cdf", "exponential_cdf", "qexponential_cdf",
    "cdf_tle", "pdf_tle", "quantile_tle",
    "cdf_tlqe", "pdf_tlqe", "quantile_tlqe",
    "support", "sample",
    "ObjectiveKind", "ObjectiveValue", "objective_value",
    "ls_value", "wls_value", "cvm_value", "ad_value", "gradient",
    "ParamSpace", "OptimizerConfig", "OptimizeOutcome",
    "NoFeasibleStartError", "minimize", "default_initial_guesses",
    "Method", "FitRequest", "FitResult", "fit", "fit_mle",
    "StudyConfig", "StudyReport", "run_study",
]
