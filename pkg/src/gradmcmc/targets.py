"""Target distributions known up to a constant, with gradients and optional
Hessian-vector products.

Every experimental target used by the benchmark suite is constructed here:
the badly scaled diagonal Gaussian, the 2-D correlated Gaussian, the
squared-exponential-kernel Gaussian, and Bayesian logistic regression
posteriors over user-supplied or synthetic classification data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError


class TargetModel:
    """Base target: unnormalised log-density plus gradient.

    Subclasses set `dim`, `name`, and override the evaluation methods;
    `true_scales` (per-dimension standard deviations) is populated when the
    target knows them, for diagnostics that compare learned against true
    scales.
    """

    dim: int
    name = "target"
    has_gradient = True
    has_hvp = False
    true_scales = None

    def log_density(self, x):
        raise NotImplementedError

    def grad_log_density(self, x):
        raise NotImplementedError

    def hessian_vector_product(self, x, v):
        raise CapabilityError(f"{self.name} does not provide Hessian-vector products")

    def _check(self, x, name="x"):
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise ValueError(f"{name} must be a length-{self.dim} vector, got shape {x.shape}")
        return x


class DiagonalGaussianTarget(TargetModel):
    """Zero-mean Gaussian with diagonal covariance diag(stds^2)."""

    has_hvp = True

    def __init__(self, stds, name="diag_gaussian"):
        stds = np.ascontiguousarray(stds, dtype=np.float64)
        if stds.ndim != 1 or np.any(stds <= 0):
            raise ValueError("stds must be a vector of positive values")
        self.dim = stds.shape[0]
        self.name = name
        self.stds = stds
        self.variances = stds * stds
        self.true_scales = stds
        self._log_norm = -0.5 * float(np.sum(np.log(2.0 * np.pi * self.variances)))

    def log_density(self, x):
        x = self._check(x)
        return self._log_norm - 0.5 * float(np.sum(x * x / self.variances))

    def grad_log_density(self, x):
        x = self._check(x)
        return -x / self.variances

    def hessian_vector_product(self, x, v):
        self._check(x)
        v = self._check(v, name="v")
        return -v / self.variances


class FullGaussianTarget(TargetModel):
    """Zero-mean Gaussian with a dense covariance matrix.

    One Cholesky factorisation is taken at construction (O(n^3) once); every
    evaluation afterwards is an O(n^2) matrix-vector product with the stored
    precision matrix.
    """

    has_hvp = True

    def __init__(self, cov, name="gaussian"):
        cov = np.ascontiguousarray(cov, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError("cov must be a square matrix")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as e:
            raise ValueError("covariance matrix is not positive definite") from e
        self.dim = cov.shape[0]
        self.name = name
        self.cov = cov
        self.chol = chol
        inv_chol = np.linalg.inv(chol)
        self.precision = inv_chol.T @ inv_chol
        self.true_scales = np.sqrt(np.diagonal(cov))
        log_det = 2.0 * float(np.sum(np.log(np.diagonal(chol))))
        self._log_norm = -0.5 * (self.dim * np.log(2.0 * np.pi) + log_det)

    def log_density(self, x):
        x = self._check(x)
        return self._log_norm - 0.5 * float(x @ (self.precision @ x))

    def grad_log_density(self, x):
        x = self._check(x)
        return -(self.precision @ x)

    def hessian_vector_product(self, x, v):
        self._check(x)
        v = self._check(v, name="v")
        return -(self.precision @ v)


@dataclass
class ClassificationDataset:
    """Binary classification data: m x d feature matrix (bias column included)
    and labels in {0, 1}."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must match the number of feature rows")
        if not np.all((self.labels == 0.0) | (self.labels == 1.0)):
            raise ValueError("labels must take values in {0, 1}")

    @property
    def num_points(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


def prepare_dataset(raw_features, labels, standardize=True):
    """Build a ClassificationDataset from raw feature columns.

    Non-bias columns are standardised to zero mean / unit standard deviation
    (constant columns are left centred only), then a constant-1 bias column is
    appended.
    """
    raw = np.ascontiguousarray(raw_features, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[0] == 0:
        raise ValueError("raw_features must be a non-empty 2-D matrix")
    cols = raw.copy()
    if standardize:
        mean = cols.mean(axis=0)
        std = cols.std(axis=0)
        std = np.where(std > 0.0, std, 1.0)
        cols = (cols - mean) / std
    bias = np.ones((cols.shape[0], 1))
    return ClassificationDataset(np.hstack([cols, bias]), np.asarray(labels))


def synthetic_classification_dataset(num_points=500, num_features=10, seed=0,
                                     standardize=True):
    """Random Gaussian features with labels drawn from a known logistic model."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((num_points, num_features))
    true_w = rng.standard_normal(num_features + 1)
    logits = raw @ true_w[:-1] + true_w[-1]
    labels = (rng.random(num_points) < 1.0 / (1.0 + np.exp(-logits))).astype(np.float64)
    return prepare_dataset(raw, labels, standardize=standardize)


class LogisticRegressionTarget(TargetModel):
    """Posterior of Bayesian logistic regression: Bernoulli log-likelihood plus
    an isotropic Gaussian log-prior -||w||^2 / (2 prior_variance), additive
    constants dropped."""

    has_hvp = True

    def __init__(self, data: ClassificationDataset, prior_variance=100.0,
                 name="logistic_regression"):
        if prior_variance <= 0:
            raise ValueError("prior_variance must be positive")
        if data.num_points == 0:
            raise ValueError("dataset is empty")
        self.dim = data.dim
        self.name = name
        self.data = data
        self.prior_variance = float(prior_variance)

    def log_density(self, w):
        w = self._check(w)
        z = self.data.features @ w
        y = self.data.labels
        # log sigma(z) = -softplus(-z); log(1 - sigma(z)) = -softplus(z)
        ll = -np.sum(y * np.logaddexp(0.0, -z) + (1.0 - y) * np.logaddexp(0.0, z))
        return float(ll) - 0.5 * float(w @ w) / self.prior_variance

    def grad_log_density(self, w):
        w = self._check(w)
        z = self.data.features @ w
        p = 1.0 / (1.0 + np.exp(-z))
        return self.data.features.T @ (self.data.labels - p) - w / self.prior_variance

    def hessian_vector_product(self, w, v):
        w = self._check(w)
        v = self._check(v, name="v")
        z = self.data.features @ w
        p = 1.0 / (1.0 + np.exp(-z))
        sv = self.data.features @ v
        return -(self.data.features.T @ (p * (1.0 - p) * sv)) - v / self.prior_variance


def make_neal_gaussian(n) -> TargetModel:
    """Diagonal Gaussian whose stds span the linear grid from 0.01 to 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    stds = np.linspace(0.01, 1.0, n)
    return DiagonalGaussianTarget(stds, name=f"neal_gaussian_{n}")


def make_correlated_gaussian_2d(correlation=0.99) -> TargetModel:
    """2-D unit-variance Gaussian with the given off-diagonal correlation."""
    if not -1.0 < correlation < 1.0:
        raise ValueError("correlation must lie in (-1, 1)")
    cov = np.array([[1.0, correlation], [correlation, 1.0]])
    return FullGaussianTarget(cov, name="correlated_gaussian_2d")


def make_kernel_gaussian(grid_points, low=0.0, high=4.0) -> TargetModel:
    """Gaussian whose covariance is a squared-exponential kernel matrix
    (lengthscale^2 = 0.16) plus a 0.01 white-noise nugget, evaluated on a
    regular grid over [low, high]."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    if not high > low:
        raise ValueError("require high > low")
    grid = np.linspace(low, high, grid_points)
    diff = grid[:, None] - grid[None, :]
    cov = np.exp(-0.5 * diff * diff / 0.16) + 0.01 * np.eye(grid_points)
    return FullGaussianTarget(cov, name=f"kernel_gaussian_{grid_points}")


def make_logistic_regression(data: ClassificationDataset,
                             prior_variance=100.0) -> TargetModel:
    """Logistic-regression posterior over an ingested dataset."""
    return LogisticRegressionTarget(data, prior_variance=prior_variance)
