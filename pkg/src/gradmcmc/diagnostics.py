"""Effective sample size estimation and per-run summaries.

ESS uses Geyer's initial-positive-sequence truncation over directly computed
autocovariances: consecutive autocorrelation pairs (rho_{2m} + rho_{2m+1}) are
summed while positive and the sum stops at the first nonpositive pair. The
estimate is clamped to [1, N]. The estimator name is recorded in run metadata
so results stay comparable across runs.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._backend import BACKEND, kernels

ESS_ESTIMATOR = "geyer_initial_positive_sequence"


@dataclass
class ChainTrace:
    """Post-burn-in states plus full-run acceptance flags and log-target values.

    `states` holds the S retained samples row-wise; `accept_flags` and
    `log_target` cover all burn-in plus sampling iterations; `wall_time` is
    the joint burn-in + collection time in seconds.
    """

    states: np.ndarray
    accept_flags: np.ndarray
    log_target: np.ndarray
    wall_time: float
    learned_scale: object = None  # final proposal scale, when the sampler has one

    @property
    def num_samples(self):
        return self.states.shape[0]

    @property
    def dim(self):
        return self.states.shape[1]


@dataclass
class RunSummary:
    """Min/median/max ESS across dimensions, sampling-phase acceptance rate,
    and min ESS per second, plus the provenance needed to rerun."""

    ess_min: float
    ess_med: float
    ess_max: float
    accept_rate: float
    min_ess_per_sec: float
    seed: int = 0
    sampler: str = ""
    target: str = ""
    ess_estimator: str = ESS_ESTIMATOR
    backend: str = field(default=BACKEND)


def ess(series) -> float:
    """Effective sample size N / (1 + 2 sum_k rho_k) with Geyer truncation.

    Zero-variance (degenerate) series return 1 with a warning.
    """
    y = np.ascontiguousarray(series, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("series must be 1-D")
    n = y.shape[0]
    if n < 10:
        raise ValueError("series must have length >= 10")
    y = y - y.mean()
    if float(y @ y) == 0.0:
        warnings.warn("zero-variance series; returning ESS = 1", RuntimeWarning)
        return 1.0
    tau = kernels.geyer_tau(y)
    if tau <= 0.0:
        return float(n)
    return float(min(float(n), max(1.0, n / tau)))


def summarize_run(trace: ChainTrace, *, seed=0, sampler="", target="") -> RunSummary:
    """Per-dimension ESS over the retained samples, reduced to min/median/max.

    The acceptance rate covers the sampling phase only (the last S flags);
    median uses the midpoint convention for an even number of dimensions.
    """
    if trace.num_samples == 0:
        raise ValueError("trace has no retained samples")
    per_dim = np.array([ess(trace.states[:, j]) for j in range(trace.dim)])
    sampling_flags = trace.accept_flags[-trace.num_samples:]
    accept_rate = float(np.mean(sampling_flags))
    ess_min = float(per_dim.min())
    return RunSummary(
        ess_min=ess_min,
        ess_med=float(np.median(per_dim)),
        ess_max=float(per_dim.max()),
        accept_rate=accept_rate,
        min_ess_per_sec=ess_min / trace.wall_time if trace.wall_time > 0 else float("inf"),
        seed=seed,
        sampler=sampler,
        target=target,
    )
