"""Comparison samplers: scalar-step random walk and MALA, the non-gradient
adaptive Metropolis with running Cholesky updates, and Hamiltonian Monte Carlo
with a fixed number of leapfrog steps.

Scalar step sizes are tuned during burn-in by a Robbins-Monro rule on
log(sigma), targeting the standard optimal acceptance rates (0.234 random
walk, 0.574 MALA, 0.651 HMC). The adaptive Metropolis variant updates the
Cholesky factor of its full proposal covariance directly, so no matrix
decompositions are needed while sampling.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .adapt import ChainConfig, _accept, initial_scale_matrix
from .diagnostics import ChainTrace, summarize_run
from .errors import ConfigError
from .linalg import TriangularScale
from .targets import TargetModel

BASELINE_KINDS = ("RWM", "MALA", "AM", "HMC")

TARGET_RATES = {"RWM": 0.234, "MALA": 0.574, "HMC": 0.651}

AM_DIAG_FLOOR = 1e-10


@dataclass
class AmState:
    """Adaptive-Metropolis state: running mean mu, proposal factor L, and the
    decaying learning-rate schedule base_rate / (1 + t / T)."""

    mu: np.ndarray
    L: TriangularScale
    t: int = 0
    base_rate: float = 0.001
    T: float = 4000.0

    def learning_rate(self):
        return self.base_rate / (1.0 + self.t / self.T)


@dataclass
class HmcConfig:
    """Fixed-length leapfrog settings with a unit mass matrix."""

    leapfrog_steps: int = 10
    step_size: float = 0.1

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.leapfrog_steps < 1:
            raise ValueError("leapfrog_steps must be >= 1")


def am_scale_direction(L: TriangularScale, z) -> np.ndarray:
    """The update direction L [z z^T - I]_lower, evaluated in O(n^2)."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    if z.shape != (L.n,):
        raise ValueError(f"z must have length {L.n}")
    return kernels.am_scale_direction(L.entries, z)


def am_update(state: AmState, x_new) -> AmState:
    """One adaptive-Metropolis step: mu moves toward x_new first, then L moves
    along L [L^{-1}(x_new - mu)(x_new - mu)^T L^{-T} - I]_lower with the
    already-updated mu. One forward solve, one fused triangular update, no
    decompositions. Mutates and returns `state`."""
    x_new = np.ascontiguousarray(x_new, dtype=np.float64)
    if x_new.shape != state.mu.shape:
        raise ValueError("x_new dimension does not match the AM state")
    rho = state.learning_rate()
    state.mu += rho * (x_new - state.mu)
    z = kernels.forward_solve(state.L.entries, x_new - state.mu)
    kernels.am_update_scale(state.L.entries, z, rho, AM_DIAG_FLOOR)
    state.t += 1
    return state


def scalar_step_adapt(log_sigma: float, accepted: bool, alpha_star: float,
                      rate: float = 0.02) -> float:
    """Robbins-Monro step on log(sigma): log_sigma + rate * (alpha_t - alpha*)."""
    alpha_t = 1.0 if accepted else 0.0
    return log_sigma + rate * (alpha_t - alpha_star)


def hmc_leapfrog(target: TargetModel, x, p, cfg: HmcConfig):
    """Leapfrog integration of the Hamiltonian with potential -log pi(x) and
    unit mass: half kick, drifts with full kicks between, half kick.

    Returns (x', p', diverged); a non-finite energy anywhere along the path
    sets the divergence flag (the proposal is then auto-rejected).
    """
    x = np.array(x, dtype=np.float64)
    p = np.array(p, dtype=np.float64)
    step = cfg.step_size
    grad = target.grad_log_density(x)
    p = p + 0.5 * step * grad
    for i in range(cfg.leapfrog_steps):
        x = x + step * p
        if not np.all(np.isfinite(x)):
            return x, p, True
        grad = target.grad_log_density(x)
        if not np.all(np.isfinite(grad)):
            return x, p, True
        if i < cfg.leapfrog_steps - 1:
            p = p + step * grad
        else:
            p = p + 0.5 * step * grad
    if not np.all(np.isfinite(p)):
        return x, p, True
    return x, p, False


def run_baseline_chain(target: TargetModel, kind: str, config: ChainConfig,
                       seed: int):
    """Run one baseline chain with the same trace/summary contract as the
    adaptive sampler; scale adaptation stops when burn-in ends.

    Returns (ChainTrace, RunSummary)."""
    if kind not in BASELINE_KINDS:
        raise ConfigError(f"unknown baseline sampler kind {kind!r}")
    n = target.dim
    burn_in, samples = config.burn_in, config.samples
    rng = np.random.default_rng(seed)
    x = (np.array(config.x0, dtype=np.float64)
         if config.x0 is not None else rng.standard_normal(n))
    if x.shape != (n,):
        raise ConfigError(f"x0 has shape {x.shape}, expected ({n},)")

    states = np.empty((samples, n))
    flags = np.zeros(burn_in + samples, dtype=bool)
    log_target = np.empty(burn_in + samples)
    logpi_x = target.log_density(x)

    t_start = time.perf_counter()
    if kind == "AM":
        am = AmState(mu=x.copy(), L=initial_scale_matrix(n, config.initial_scale))
        for it in range(burn_in + samples):
            eps = rng.standard_normal(n)
            y = x + kernels.tri_matvec(am.L.entries, eps)
            logpi_y = target.log_density(y)
            u = rng.random()
            accepted = _accept(logpi_y - logpi_x, u)
            if accepted:
                x, logpi_x = y, logpi_y
            if it < burn_in:
                am_update(am, x)
            flags[it] = accepted
            log_target[it] = logpi_x
            if it >= burn_in:
                states[it - burn_in] = x
        learned = am.L
    elif kind == "HMC":
        alpha_star = config.alpha_star if config.alpha_star is not None else TARGET_RATES["HMC"]
        sigma = _initial_sigma(n, config)
        log_sigma = math.log(sigma)
        cfg = HmcConfig(leapfrog_steps=config.leapfrog_steps, step_size=sigma)
        for it in range(burn_in + samples):
            p0 = rng.standard_normal(n)
            cfg.step_size = sigma
            y, p1, diverged = hmc_leapfrog(target, x, p0, cfg)
            u = rng.random()
            if diverged:
                accepted = False
            else:
                logpi_y = target.log_density(y)
                delta_h = (logpi_y - logpi_x) + 0.5 * (float(p0 @ p0) - float(p1 @ p1))
                accepted = _accept(delta_h, u)
                if accepted:
                    x, logpi_x = y, logpi_y
            if it < burn_in:
                log_sigma = scalar_step_adapt(log_sigma, accepted, alpha_star,
                                              config.adapt_rate)
                sigma = math.exp(log_sigma)
            flags[it] = accepted
            log_target[it] = logpi_x
            if it >= burn_in:
                states[it - burn_in] = x
        learned = TriangularScale.diagonal(np.full(n, sigma))
    else:  # scalar-step RWM / MALA
        alpha_star = (config.alpha_star if config.alpha_star is not None
                      else TARGET_RATES[kind])
        sigma = _initial_sigma(n, config)
        log_sigma = math.log(sigma)
        use_drift = kind == "MALA"
        grad_x = target.grad_log_density(x) if use_drift else None
        for it in range(burn_in + samples):
            eps = rng.standard_normal(n)
            if use_drift:
                c_x = sigma * grad_x
                w = 0.5 * c_x + eps
                y = x + sigma * w
                logpi_y = target.log_density(y)
                grad_y = target.grad_log_density(y)
                c_y = sigma * grad_y
                v = 0.5 * (c_x + c_y) + eps
                log_ratio = logpi_y - logpi_x - 0.5 * (float(v @ v) - float(eps @ eps))
            else:
                y = x + sigma * eps
                logpi_y = target.log_density(y)
                log_ratio = logpi_y - logpi_x
            u = rng.random()
            accepted = _accept(log_ratio, u)
            if accepted:
                x, logpi_x = y, logpi_y
                if use_drift:
                    grad_x = grad_y
            if it < burn_in:
                log_sigma = scalar_step_adapt(log_sigma, accepted, alpha_star,
                                              config.adapt_rate)
                sigma = math.exp(log_sigma)
            flags[it] = accepted
            log_target[it] = logpi_x
            if it >= burn_in:
                states[it - burn_in] = x
        learned = TriangularScale.diagonal(np.full(n, sigma))
    wall = time.perf_counter() - t_start

    trace = ChainTrace(states=states, accept_flags=flags, log_target=log_target,
                       wall_time=wall, learned_scale=learned)
    summary = summarize_run(trace, seed=seed, sampler=kind, target=target.name)
    return trace, summary


def _initial_sigma(n, config: ChainConfig):
    spec = config.initial_scale
    if spec is None:
        return 0.1 / math.sqrt(n)
    if np.isscalar(spec):
        return float(spec)
    raise ConfigError("scalar-step samplers take a scalar initial_scale")
