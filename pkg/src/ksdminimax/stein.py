"""Langevin-Stein kernel for Gaussian targets and Stein Gram matrices."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import InputError, ModelError
from .kernels import KernelSpec, kernel_derivatives, kernel_eval


@dataclass(frozen=True, eq=False)
class GaussianMeasure:
    """``N(mean, covariance)`` on R^d.

    ``covariance=None`` (or :meth:`standard`) selects the identity fast path.
    The precision matrix is factorised once at construction and reused for
    every score evaluation.
    """

    mean: np.ndarray
    covariance: Optional[np.ndarray] = None
    _precision: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _chol: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if mean.ndim != 1 or not np.all(np.isfinite(mean)):
            raise ModelError("mean must be a finite vector")
        object.__setattr__(self, "mean", mean)
        if self.covariance is None:
            return
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ModelError(f"covariance must be {d}x{d}, got {cov.shape}")
        if not np.all(np.isfinite(cov)):
            raise ModelError("covariance has non-finite entries")
        scale = max(np.abs(cov).max(), np.finfo(float).tiny)
        if np.abs(cov - cov.T).max() > 1e-12 * scale:
            raise ModelError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ModelError("covariance is not positive definite") from None
        if np.array_equal(cov, np.eye(d)):
            object.__setattr__(self, "covariance", None)
            return
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "_chol", chol)
        eye = np.eye(d)
        object.__setattr__(self, "_precision", np.linalg.solve(cov, eye))

    @classmethod
    def standard(cls, dim):
        return cls(np.zeros(dim))

    @property
    def dim(self):
        return self.mean.shape[0]

    @property
    def is_identity(self):
        return self.covariance is None

    @property
    def is_standard(self):
        return self.is_identity and not np.any(self.mean)

    def cov_matrix(self):
        return np.eye(self.dim) if self.covariance is None else self.covariance.copy()

    def scores(self, X):
        """Row-wise score ``-Sigma^{-1} (x - mu)`` for an ``(n, d)`` array."""
        centered = X - self.mean
        if self._precision is None:
            return -centered
        return -centered @ self._precision

    def sample(self, n, rng):
        z = rng.standard_normal((n, self.dim))
        if self._chol is not None:
            z = z @ self._chol.T
        return z + self.mean


@dataclass
class SteinGram:
    """Stein Gram blocks. ``landmark`` and ``cross`` are set only for Nystrom use."""

    full: Optional[np.ndarray]
    cross: Optional[np.ndarray] = None
    landmark: Optional[np.ndarray] = None
    landmark_indices: Optional[np.ndarray] = None


def _check_dims(target, spec):
    if target.dim != spec.dim:
        raise InputError(f"target dimension {target.dim} != kernel dimension {spec.dim}")


def score(target: GaussianMeasure, x) -> np.ndarray:
    """Gradient of the log-density of ``target`` at ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (target.dim,):
        raise InputError(f"x must have length {target.dim}, got shape {x.shape}")
    return target.scores(x[None, :])[0]


def stein_kernel_eval(target: GaussianMeasure, spec: KernelSpec, x, y) -> float:
    """Single Stein kernel value, assembled term by term from the kernel derivatives."""
    _check_dims(target, spec)
    sx = score(target, x)
    sy = score(target, y)
    gx, gy, mixed = kernel_derivatives(spec, x, y)
    k = kernel_eval(spec, x, y)
    return float(sx @ sy * k + sy @ gx + sx @ gy + mixed)


def _as_data(samples):
    data = getattr(samples, "data", samples)
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    return data


def stein_gram(target: GaussianMeasure, spec: KernelSpec, samples, landmarks=None,
               full=True) -> SteinGram:
    """Assemble Stein Gram matrices on ``samples`` (a SampleSet or ``(n, d)`` array).

    With ``landmarks`` (an index multiset into the sample) the ``m x n`` cross
    block and the ``m x m`` landmark block are filled as well. Pass
    ``full=False`` to skip the ``n x n`` block when only the Nystrom blocks are
    needed.
    """
    _check_dims(target, spec)
    X = _as_data(samples)
    n = X.shape[0]
    if n == 0:
        raise InputError("empty sample")
    if X.shape[1] != spec.dim:
        raise InputError(f"samples have {X.shape[1]} columns, kernel expects {spec.dim}")
    S = target.scores(X)
    gram = SteinGram(full=_kernels.stein_block_sym(X, S, spec.gamma) if full else None)
    if landmarks is not None:
        idx = np.asarray(landmarks)
        if idx.ndim != 1 or idx.size == 0 or not np.issubdtype(idx.dtype, np.integer):
            raise InputError("landmarks must be a non-empty 1-d integer index array")
        if idx.min() < 0 or idx.max() >= n:
            raise InputError(f"landmark index out of range [0, {n})")
        cross = _kernels.stein_block(X[idx], S[idx], X, S, spec.gamma)
        gram.cross = cross
        sub = cross[:, idx]
        gram.landmark = 0.5 * (sub + sub.T)
        gram.landmark_indices = idx
    return gram
