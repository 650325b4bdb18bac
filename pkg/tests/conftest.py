"""Shared test helpers: random factor generation and the finite-difference
oracles used to check the analytic adaptation gradients."""
import numpy as np

from gradmcmc import targets


def random_lower(n, rng, diag_low=0.5, diag_high=1.5, off_scale=0.3):
    """Well-conditioned random lower-triangular factor with positive diagonal."""
    A = off_scale * rng.standard_normal((n, n))
    return np.tril(A, -1) + np.diag(diag_low + (diag_high - diag_low) * rng.random(n))


def random_gaussian_target(n, rng):
    """Random full-covariance Gaussian (always has Hessian-vector products)."""
    A = rng.standard_normal((n, n))
    return targets.FullGaussianTarget(A @ A.T + n * np.eye(n))


def fd_grad_lower(f, L0, h0=1e-6):
    """Central finite differences of a scalar function of the full matrix,
    taken entry by entry over the lower triangle."""
    n = L0.shape[0]
    G = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            h = h0 * (1.0 + abs(L0[i, j]))
            Lp = L0.copy()
            Lp[i, j] += h
            Lm = L0.copy()
            Lm[i, j] -= h
            G[i, j] = (f(Lp) - f(Lm)) / (2.0 * h)
    return G


def rel_err(analytic, reference):
    """Max-norm relative disagreement between two gradient matrices."""
    scale = max(1e-12, float(np.max(np.abs(reference))))
    return float(np.max(np.abs(analytic - reference))) / scale


def rwm_objective(target, x, eps, beta, branch_downhill):
    """Fixed-branch random-walk integrand: the downhill term (when active)
    plus the entropy term, as a function of the full factor matrix."""
    def f(Lmat):
        val = beta * float(np.sum(np.log(np.diag(Lmat))))
        if branch_downhill:
            y = x + Lmat @ eps
            val += target.log_density(y) - target.log_density(x)
        return val
    return f


def mala_objective(target, x, eps, beta, branch_downhill, grad_y_frozen=None):
    """Fixed-branch MALA integrand. With `grad_y_frozen` the gradient at the
    proposed point is held constant (the stop-gradient objective); otherwise it
    is re-evaluated at y(L) so the finite difference sees the full dependence."""
    def f(Lmat):
        val = beta * float(np.sum(np.log(np.diag(Lmat))))
        if branch_downhill:
            gx = target.grad_log_density(x)
            y = x + 0.5 * Lmat @ (Lmat.T @ gx) + Lmat @ eps
            gy = grad_y_frozen if grad_y_frozen is not None else target.grad_log_density(y)
            v = 0.5 * Lmat.T @ (gx + gy) + eps
            val += (target.log_density(y) - target.log_density(x)
                    - 0.5 * (float(v @ v) - float(eps @ eps)))
        return val
    return f


def make_mala_event(target, x, eps, Lmat):
    """Construct a ProposalEvent exactly as the MALA chain loop would."""
    from gradmcmc.proposals import ProposalEvent

    gx = target.grad_log_density(x)
    y = x + 0.5 * Lmat @ (Lmat.T @ gx) + Lmat @ eps
    gy = target.grad_log_density(y)
    v = 0.5 * Lmat.T @ (gx + gy) + eps
    log_ratio = (target.log_density(y) - target.log_density(x)
                 - 0.5 * (float(v @ v) - float(eps @ eps)))
    return ProposalEvent(x=x, eps=eps, y=y, grad_x=gx, grad_y=gy, log_ratio=log_ratio)


def make_rwm_event(target, x, eps, Lmat):
    from gradmcmc.proposals import ProposalEvent

    y = x + Lmat @ eps
    log_ratio = target.log_density(y) - target.log_density(x)
    return ProposalEvent(x=x, eps=eps, y=y, grad_x=target.grad_log_density(x),
                         grad_y=target.grad_log_density(y), log_ratio=log_ratio)


def ar1_series(phi, n, rng):
    """Stationary unit-variance AR(1) sample path."""
    x = np.empty(n)
    x[0] = rng.standard_normal()
    innov = np.sqrt(1.0 - phi * phi) * rng.standard_normal(n)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + innov[t]
    return x
