"""Pure-numpy implementations of the per-iteration hot kernels.

Mirrors `_kernels.pyx` function for function; selected by `_backend` when the
compiled extension is unavailable (or when GRADMCMC_PURE_PYTHON=1).

All matrix arguments are C-contiguous float64 arrays whose strict upper
triangle is zero; callers validate shapes and diagonals before dispatching.
"""
import numpy as np


def tri_matvec(L, v):
    """Lower-triangular matrix-vector product L @ v."""
    return L @ v


def tri_tmatvec(L, v):
    """Transposed product L.T @ v."""
    return L.T @ v


def forward_solve(L, b):
    """Solve L z = b by forward substitution (positive diagonal assumed)."""
    n = L.shape[0]
    z = np.empty(n)
    for i in range(n):
        z[i] = (b[i] - L[i, :i] @ z[:i]) / L[i, i]
    return z


def outer_lower(a, b):
    """Lower-triangular part (diagonal included) of the outer product a b^T."""
    return np.tril(np.outer(a, b))


def log_det_tri(L):
    """Sum of log diagonal entries."""
    return float(np.sum(np.log(np.diagonal(L))))


def axpy_outer_lower(M, c, a, b):
    """In place: M += c * lower(a b^T)."""
    M += c * np.tril(np.outer(a, b))


def add_beta_invdiag(M, beta, L):
    """In place: M[i, i] += beta / L[i, i]."""
    idx = np.arange(M.shape[0])
    M[idx, idx] += beta / L[idx, idx]


def rmsprop_update(L, G, grad, eta, floor):
    """In place: G <- 0.9 G + 0.1 grad^2, then L += (eta / (1 + sqrt(G))) * grad,
    then clamp diag(L) to >= floor."""
    G *= 0.9
    G += 0.1 * grad * grad
    L += (eta / (1.0 + np.sqrt(G))) * grad
    np.fill_diagonal(L, np.maximum(np.diagonal(L), floor))


def am_scale_direction(L, z):
    """Return L @ lower(z z^T) - L without forming the n x n outer product twice.

    Row-wise suffix sums give (L @ lower(z z^T))[i, k] = z[k] * sum_{j=k..i} L[i, j] z[j],
    an O(n^2) evaluation.
    """
    n = L.shape[0]
    P = L * z[None, :]
    Q = np.cumsum(P, axis=1)
    tot = np.diagonal(Q)
    C = tot[:, None] - np.concatenate([np.zeros((n, 1)), Q[:, :-1]], axis=1)
    return C * z[None, :] - L


def am_update_scale(L, z, rho, floor):
    """In place AM Cholesky update: L += rho * (L @ lower(z z^T - I)), diag clamped."""
    L += rho * am_scale_direction(L, z)
    np.fill_diagonal(L, np.maximum(np.diagonal(L), floor))


def geyer_tau(y):
    """Integrated autocorrelation time 1 + 2*sum(rho_k) with Geyer's
    initial-positive-sequence truncation.

    `y` must already be mean-centered with positive variance. Autocovariances
    are computed directly lag by lag, stopping at the first nonpositive pair
    (rho_{2m} + rho_{2m+1}).
    """
    n = y.shape[0]
    c0 = float(y @ y) / n
    pair_sum = 0.0
    m = 0
    while 2 * m + 1 < n:
        if m == 0:
            r_even = 1.0
        else:
            k = 2 * m
            r_even = float(y[: n - k] @ y[k:]) / (n * c0)
        k = 2 * m + 1
        r_odd = float(y[: n - k] @ y[k:]) / (n * c0)
        pair = r_even + r_odd
        if pair <= 0.0:
            break
        pair_sum += pair
        m += 1
    return 2.0 * pair_sum - 1.0
