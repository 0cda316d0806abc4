"""Extract the largest symmetric, monotone or log-concave background component
of a one-dimensional density, from an exact density or from a sample."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .bands import ConfidenceBand, bootstrap_band
from .decomposition import BackgroundDecomposition
from .density import (DensityGrid, MixtureSpec, Sample, eval_mixture, gaussian_kde,
                      grid_from_mixture, integrate, reflected_kde, select_bandwidth_lscv,
                      theta0_plugin)
from .logconcave import extract_logconcave, logconcave_interval
from .monotone import extract_monotone, monotone_interval
from .pipeline import FitOptions, fit
from .simulate import run_replications, sample_mixture, true_pi0
from .symmetric import extract_symmetric, search_center, symmetric_interval

__all__ = [
    "BACKEND", "ConfidenceBand", "bootstrap_band", "BackgroundDecomposition", "DensityGrid",
    "MixtureSpec", "Sample", "eval_mixture", "gaussian_kde", "grid_from_mixture", "integrate",
    "reflected_kde", "select_bandwidth_lscv", "theta0_plugin", "extract_logconcave",
    "logconcave_interval", "extract_monotone", "monotone_interval", "FitOptions", "fit",
    "run_replications", "sample_mixture", "true_pi0", "extract_symmetric", "search_center",
    "symmetric_interval",
]
