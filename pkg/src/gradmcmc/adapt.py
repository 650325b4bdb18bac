"""Online proposal adaptation by stochastic-gradient ascent on the
entropy-regularised speed objective.

Per iteration the sampler proposes through the reparametrised kernel, takes
one RMSprop ascent step on the Cholesky factor using a pathwise gradient of
the acceptance bound (plus the entropy term), then runs the usual
accept/reject and nudges the entropy weight beta toward the desired average
acceptance rate. Adaptation runs during burn-in only; afterwards the kernel is
frozen and samples are collected.

Three gradient estimators are provided:

- ``gadRWM``: full-covariance random walk; gradient uses the target gradient
  at the proposed point only when the proposal is downhill.
- ``gadMALAf``: preconditioned MALA with the gradient at the proposed point
  treated as constant (stop-gradient); one extra outer product per iteration.
- ``gadMALAe``: exact pathwise MALA gradient; adds a Hessian-vector-product
  correction term.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .diagnostics import ChainTrace, RunSummary, summarize_run
from .errors import CapabilityError, ConfigError
from .linalg import TriangularScale
from .proposals import ProposalEvent
from .targets import TargetModel

GAD_KINDS = ("gadRWM", "gadMALAf", "gadMALAe")

DIAG_FLOOR = 1e-10

DEFAULT_ALPHA_STAR = {"gadRWM": 0.25, "gadMALAf": 0.55, "gadMALAe": 0.55}
DEFAULT_ETA = {"gadRWM": 5e-5, "gadMALAf": 1.5e-4, "gadMALAe": 1.5e-4}


@dataclass
class ChainConfig:
    """Run settings shared by the adaptive and baseline samplers.

    `eta` and `alpha_star` default per sampler kind when left as None.
    `initial_scale` may be a full lower-triangular matrix, a per-dimension
    diagonal vector, or a scalar; None gives the standard diag(0.1/sqrt(n))
    start. `x0` defaults to a standard-normal draw with the run seed.
    """

    burn_in: int = 20000
    samples: int = 20000
    eta: float | None = None
    alpha_star: float | None = None
    rho_beta: float = 0.02
    initial_scale: object = None
    x0: np.ndarray | None = None
    adapt_rate: float = 0.02
    leapfrog_steps: int = 10


@dataclass
class AdaptationState:
    """Everything the adaptation loop owns: the scale factor L, the entropy
    weight beta, the elementwise RMSprop accumulator G, and the schedule
    constants."""

    L: TriangularScale
    beta: float
    G: np.ndarray
    iter: int
    alpha_star: float
    eta: float
    rho_beta: float
    adapting: bool


def initial_scale_matrix(n, spec=None):
    """Materialise the starting L from a scalar, diagonal vector, full matrix,
    or None (diag(0.1/sqrt(n)))."""
    if spec is None:
        return TriangularScale.diagonal(np.full(n, 0.1 / math.sqrt(n)))
    if isinstance(spec, TriangularScale):
        if spec.n != n:
            raise ConfigError(f"initial_scale has dimension {spec.n}, target has {n}")
        return spec.copy()
    if np.isscalar(spec):
        return TriangularScale.diagonal(np.full(n, float(spec)))
    arr = np.asarray(spec, dtype=np.float64)
    if arr.ndim == 1:
        if arr.shape[0] != n:
            raise ConfigError(f"initial_scale vector has length {arr.shape[0]}, expected {n}")
        return TriangularScale.diagonal(arr)
    if arr.shape != (n, n):
        raise ConfigError(f"initial_scale matrix has shape {arr.shape}, expected {(n, n)}")
    return TriangularScale(arr)


def gadrwm_gradient(ev: ProposalEvent, L: TriangularScale, beta: float) -> np.ndarray:
    """Pathwise gradient of the random-walk bound plus the entropy term.

    Downhill proposals (log_ratio < 0) contribute lower(grad_y eps^T); the
    beta/L_ii diagonal entropy force is always present.
    """
    n = L.n
    grad = np.zeros((n, n))
    if ev.log_ratio < 0.0:
        kernels.axpy_outer_lower(grad, 1.0, ev.grad_y, ev.eps)
    kernels.add_beta_invdiag(grad, beta, L.entries)
    return grad


def gadmalaf_gradient(ev: ProposalEvent, L: TriangularScale, beta: float) -> np.ndarray:
    """Stop-gradient MALA estimator: with d = grad_x - grad_y, the downhill
    branch is lower(-(1/2) d ((1/2) L^T d + eps)^T); one transposed matvec and
    one outer product."""
    n = L.n
    grad = np.zeros((n, n))
    if ev.log_ratio < 0.0:
        d = ev.grad_x - ev.grad_y
        w = 0.5 * kernels.tri_tmatvec(L.entries, d) + ev.eps
        kernels.axpy_outer_lower(grad, -0.5, d, w)
    kernels.add_beta_invdiag(grad, beta, L.entries)
    return grad


def gadmalae_gradient(ev: ProposalEvent, L: TriangularScale, beta: float,
                      target: TargetModel) -> np.ndarray:
    """Exact pathwise MALA gradient: the stop-gradient estimator plus the
    Hessian correction -(1/2) lower[(1/2)(h (L^T grad_x)^T + grad_x (L^T h)^T) + h eps^T]
    with h = Hessian(y) . (L v), v = (1/2) L^T (grad_x + grad_y) + eps."""
    if not target.has_hvp:
        raise CapabilityError("gadMALAe requires Hessian-vector products")
    grad = gadmalaf_gradient(ev, L, beta)
    if ev.log_ratio < 0.0:
        Le = L.entries
        v = 0.5 * kernels.tri_tmatvec(Le, ev.grad_x + ev.grad_y) + ev.eps
        h = target.hessian_vector_product(ev.y, kernels.tri_matvec(Le, v))
        kernels.axpy_outer_lower(grad, -0.25, h, kernels.tri_tmatvec(Le, ev.grad_x))
        kernels.axpy_outer_lower(grad, -0.25, ev.grad_x, kernels.tri_tmatvec(Le, h))
        kernels.axpy_outer_lower(grad, -0.5, h, ev.eps)
    return grad


def rmsprop_step(state: AdaptationState, grad: np.ndarray) -> AdaptationState:
    """Ascent step with elementwise adaptive rates: G <- 0.9 G + 0.1 grad^2
    first, then L += (eta / (1 + sqrt(G))) grad, then the diagonal is clamped
    to the positivity floor. Mutates and returns `state`."""
    kernels.rmsprop_update(state.L.entries, state.G, grad, state.eta, DIAG_FLOOR)
    return state


def update_beta(state: AdaptationState, accepted: bool) -> AdaptationState:
    """Multiplicative controller beta <- beta (1 + rho_beta (alpha_t - alpha*))
    with alpha_t in {0, 1}. Callers invoke this only while adapting."""
    alpha_t = 1.0 if accepted else 0.0
    state.beta *= 1.0 + state.rho_beta * (alpha_t - state.alpha_star)
    return state


def _accept(log_ratio, u):
    if log_ratio >= 0.0:
        return True
    if u <= 0.0:
        return True
    return math.log(u) < log_ratio


def run_adaptive_chain(target: TargetModel, kind: str, config: ChainConfig,
                       seed: int):
    """Run one gradient-adapted chain.

    Per iteration: draw eps, form the proposal, take the RMSprop step on L
    (burn-in only, before the accept/reject decision), accept or reject with
    the ratio evaluated under the L that generated the proposal, then update
    beta. Returns (ChainTrace, AdaptationState, RunSummary).
    """
    if kind not in GAD_KINDS:
        raise ConfigError(f"unknown adaptive sampler kind {kind!r}")
    if kind == "gadMALAe" and not target.has_hvp:
        raise ConfigError(f"gadMALAe requires Hessian-vector products; {target.name} has none")
    n = target.dim
    burn_in, samples = config.burn_in, config.samples
    alpha_star = config.alpha_star if config.alpha_star is not None else DEFAULT_ALPHA_STAR[kind]
    eta = config.eta if config.eta is not None else DEFAULT_ETA[kind]

    rng = np.random.default_rng(seed)
    x = (np.array(config.x0, dtype=np.float64)
         if config.x0 is not None else rng.standard_normal(n))
    if x.shape != (n,):
        raise ConfigError(f"x0 has shape {x.shape}, expected ({n},)")

    L = initial_scale_matrix(n, config.initial_scale)
    state = AdaptationState(
        L=L, beta=1.0, G=np.zeros((n, n)), iter=0,
        alpha_star=alpha_star, eta=eta, rho_beta=config.rho_beta,
        adapting=burn_in > 0,
    )
    use_drift = kind in ("gadMALAf", "gadMALAe")

    states = np.empty((samples, n))
    flags = np.zeros(burn_in + samples, dtype=bool)
    log_target = np.empty(burn_in + samples)

    logpi_x = target.log_density(x)
    grad_x = target.grad_log_density(x) if (use_drift or burn_in > 0) else None
    c_x = None  # cached L^T grad_x, valid only while L is frozen

    t_start = time.perf_counter()
    for it in range(burn_in + samples):
        adapting = it < burn_in
        state.adapting = adapting
        eps = rng.standard_normal(n)
        Le = state.L.entries

        if use_drift:
            if c_x is None:
                c_x = kernels.tri_tmatvec(Le, grad_x)
            w = 0.5 * c_x + eps
            y = x + kernels.tri_matvec(Le, w)
            logpi_y = target.log_density(y)
            grad_y = target.grad_log_density(y)
            c_y = kernels.tri_tmatvec(Le, grad_y)
            v = 0.5 * (c_x + c_y) + eps
            log_ratio = logpi_y - logpi_x - 0.5 * (float(v @ v) - float(eps @ eps))
        else:
            y = x + kernels.tri_matvec(Le, eps)
            logpi_y = target.log_density(y)
            # the frozen random walk never uses gradients; skip them
            grad_y = target.grad_log_density(y) if adapting else None
            c_y = None
            log_ratio = logpi_y - logpi_x

        ev = ProposalEvent(x=x, eps=eps, y=y, grad_x=grad_x, grad_y=grad_y,
                           log_ratio=log_ratio)

        if adapting:
            if kind == "gadRWM":
                grad = gadrwm_gradient(ev, state.L, state.beta)
            elif kind == "gadMALAf":
                grad = gadmalaf_gradient(ev, state.L, state.beta)
            else:
                grad = gadmalae_gradient(ev, state.L, state.beta, target)
            rmsprop_step(state, grad)

        u = rng.random()
        accepted = _accept(log_ratio, u)
        ev.accepted = accepted
        if accepted:
            x, logpi_x, grad_x = y, logpi_y, grad_y

        if adapting:
            update_beta(state, accepted)
            c_x = None  # L changed this iteration
        elif accepted:
            c_x = c_y

        state.iter = it + 1
        flags[it] = accepted
        log_target[it] = logpi_x
        if it >= burn_in:
            states[it - burn_in] = x
    wall = time.perf_counter() - t_start

    state.adapting = False
    trace = ChainTrace(states=states, accept_flags=flags, log_target=log_target,
                       wall_time=wall, learned_scale=state.L)
    summary = summarize_run(trace, seed=seed, sampler=kind, target=target.name)
    return trace, state, summary
