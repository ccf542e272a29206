"""Quasi-likelihood divergence tests for discretely observed ergodic diffusions.

Simulate high-frequency diffusion samples, fit parameters by minimizing a
Gaussian quasi-likelihood contrast, test hypotheses with a family of
divergence statistics (all asymptotically chi-squared under the null), and
reproduce empirical power tables by Monte Carlo.
"""

from .backend import backend_name
from .distributions import (chisq_cdf, chisq_quantile, noncentral_chisq_cdf,
                            regularized_gamma_p, theoretical_power)
from .divergence import (DEFAULT_PHIS, PhiFunction, TestStatistic,
                         all_statistics, d_phi_n, gqlrt, make_phi, t_statistic,
                         u_phi_limit)
from .errors import (ConfigurationError, DiffTestError, NumericDomainError,
                     NumericError, SimulationBlowupError)
from .estimators import Estimate, OptimizerOptions, qmle, standardize_error
from .models import Model, ParamVector, make_builtin_model, sigma_ops
from .power_study import (ExperimentConfig, PowerTable, calibrate_threshold,
                          dominance_summary, empirical_power,
                          local_alternative, read_power_csv,
                          render_text_table, write_power_csv)
from .quasilik import (RateMatrix, ScoreMatrix, contrast, contrast_gradient,
                       contrast_terms, score_matrix)
from .sampling import (Sample, SamplingScheme, read_sample_csv, simulate,
                       validate_conditional_moments, write_sample_csv)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DiffTestError", "NumericDomainError",
    "NumericError", "SimulationBlowupError",
    "Model", "ParamVector", "make_builtin_model", "sigma_ops",
    "Sample", "SamplingScheme", "simulate", "read_sample_csv",
    "write_sample_csv", "validate_conditional_moments",
    "RateMatrix", "ScoreMatrix", "contrast", "contrast_terms",
    "contrast_gradient", "score_matrix",
    "Estimate", "OptimizerOptions", "qmle", "standardize_error",
    "DEFAULT_PHIS", "PhiFunction", "TestStatistic", "make_phi", "d_phi_n",
    "t_statistic", "gqlrt", "all_statistics", "u_phi_limit",
    "regularized_gamma_p", "chisq_cdf", "chisq_quantile",
    "noncentral_chisq_cdf", "theoretical_power",
    "ExperimentConfig", "PowerTable", "local_alternative",
    "calibrate_threshold", "empirical_power", "dominance_summary",
    "write_power_csv", "read_power_csv", "render_text_table",
    "backend_name",
]
