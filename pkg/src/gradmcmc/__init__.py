"""Gradient-based adaptive MCMC with entropy-regularised proposal tuning.

Adaptive samplers (gadRWM, gadMALAf, gadMALAe) tune a full-covariance proposal
online by stochastic-gradient ascent on an entropy-regularised acceptance
objective; baseline samplers (RWM, MALA, AM, HMC) and effective-sample-size
diagnostics support benchmarking. Hot per-iteration kernels run in a compiled
extension when available, with a pure-numpy fallback selected at import.
"""
from ._backend import BACKEND

__version__ = "0.1.0"

from .adapt import ChainConfig, run_adaptive_chain  # noqa: E402
from .baselines import run_baseline_chain  # noqa: E402
from .diagnostics import ess, summarize_run  # noqa: E402
from .harness import load_config, load_csv_dataset, run_experiment  # noqa: E402
from .linalg import TriangularScale  # noqa: E402
from .targets import (  # noqa: E402
    make_correlated_gaussian_2d,
    make_kernel_gaussian,
    make_logistic_regression,
    make_neal_gaussian,
)

__all__ = [
    "BACKEND",
    "ChainConfig",
    "TriangularScale",
    "__version__",
    "ess",
    "load_config",
    "load_csv_dataset",
    "make_correlated_gaussian_2d",
    "make_kernel_gaussian",
    "make_logistic_regression",
    "make_neal_gaussian",
    "run_adaptive_chain",
    "run_baseline_chain",
    "run_experiment",
    "summarize_run",
]
