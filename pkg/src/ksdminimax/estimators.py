"""V-statistic and Nystrom KSD estimators."""

from dataclasses import dataclass
import enum
import math
from typing import Optional

import numpy as np

from . import _kernels
from .errors import InputError
from .kernels import KernelSpec
from .stein import GaussianMeasure, SteinGram, stein_gram

DEFAULT_REL_TOL = 1e-10


class Method(str, enum.Enum):
    V_STATISTIC = "v_statistic"
    NYSTROM = "nystrom"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"v": cls.V_STATISTIC, "v_statistic": cls.V_STATISTIC, "vstat": cls.V_STATISTIC,
                   "n": cls.NYSTROM, "nystrom": cls.NYSTROM}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise InputError(f"unknown estimator method {value!r}") from None


@dataclass(frozen=True, eq=False)
class SampleSet:
    """An ``(n, d)`` sample and the seed it was drawn with (``None`` if external)."""

    data: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InputError(f"sample must be a non-empty (n, d) array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InputError("sample contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def dim(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class EstimatorResult:
    ksd: float
    ksd_squared: float
    method: Method
    landmarks_used: Optional[int] = None
    dropped_eigenvalues: Optional[int] = None

    @classmethod
    def from_squared(cls, ksd_squared, method, **kw):
        ksd_squared = float(ksd_squared)
        return cls(math.sqrt(max(ksd_squared, 0.0)), ksd_squared, method, **kw)


def ksd_v_statistic(gram: SteinGram) -> EstimatorResult:
    """Average of all entries of the full Stein Gram matrix."""
    if gram.full is None:
        raise InputError("V-statistic needs the full Stein Gram matrix")
    n = gram.full.shape[0]
    return EstimatorResult.from_squared(gram.full.sum() / (n * n), Method.V_STATISTIC)


def ksd_v_statistic_samples(target: GaussianMeasure, spec: KernelSpec, samples) -> EstimatorResult:
    """V-statistic straight from the sample, never storing the ``n x n`` matrix.

    Same value as ``ksd_v_statistic(stein_gram(...))`` up to summation order.
    """
    if not isinstance(samples, SampleSet):
        samples = SampleSet(samples)
    if target.dim != spec.dim or samples.dim != spec.dim:
        raise InputError("target, kernel and sample dimensions disagree")
    X = samples.data
    total = _kernels.stein_vsum(X, target.scores(X), spec.gamma)
    return EstimatorResult.from_squared(total / (samples.n * samples.n), Method.V_STATISTIC)


def sample_landmarks(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``m`` indices uniformly from ``range(n)`` with replacement."""
    if m < 1:
        raise InputError(f"need at least one landmark, got m={m}")
    if n < 1:
        raise InputError(f"need a non-empty sample, got n={n}")
    return rng.integers(0, n, size=m)


def _pseudo_solve(matrix, rhs, rel_tol):
    A = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"matrix must be square, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise InputError(f"rhs must have length {A.shape[0]}, got shape {b.shape}")
    if not 0.0 < rel_tol < 1.0:
        raise InputError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    scale = np.abs(A).max() if A.size else 0.0
    if scale > 0 and np.abs(A - A.T).max() > 1e-10 * scale:
        raise InputError("matrix is not symmetric")
    evals, evecs = np.linalg.eigh(0.5 * (A + A.T))
    top = evals[-1] if evals.size else 0.0
    keep = evals > rel_tol * top if top > 0 else np.zeros(evals.shape, dtype=bool)
    coef = evecs[:, keep].T @ b / evals[keep]
    return evecs[:, keep] @ coef, int((~keep).sum())


def psd_pseudo_solve(matrix, rhs, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Minimum-norm solution ``K^- rhs`` of a symmetric PSD system.

    Eigenvalues at or below ``rel_tol * lambda_max`` (including negative
    round-off) are treated as zero.
    """
    return _pseudo_solve(matrix, rhs, rel_tol)[0]


def ksd_nystrom(target: GaussianMeasure, spec: KernelSpec, samples, m: int,
                rng: Optional[np.random.Generator] = None, rel_tol: float = DEFAULT_REL_TOL,
                landmarks=None) -> EstimatorResult:
    """Nystrom KSD estimate ``beta^T K_mm^- beta`` with ``beta = K_mn 1 / n``.

    Landmarks are drawn with replacement from ``rng``; pass ``landmarks``
    explicitly to bypass sampling (``m`` is then ignored).
    """
    if not isinstance(samples, SampleSet):
        samples = SampleSet(samples)
    if landmarks is None:
        if rng is None:
            raise InputError("ksd_nystrom needs an rng stream or explicit landmarks")
        landmarks = sample_landmarks(samples.n, m, rng)
    gram = stein_gram(target, spec, samples, landmarks=landmarks, full=False)
    beta = gram.cross.sum(axis=1) / samples.n
    alpha, dropped = _pseudo_solve(gram.landmark, beta, rel_tol)
    return EstimatorResult.from_squared(beta @ alpha, Method.NYSTROM,
                                        landmarks_used=len(gram.landmark_indices),
                                        dropped_eigenvalues=dropped)
