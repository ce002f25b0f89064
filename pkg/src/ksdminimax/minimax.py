"""Le Cam two-point machinery for the Gaussian adversarial pair, and Monte Carlo risk curves."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import math
from typing import List, Sequence

import numpy as np

from .errors import InputError, ModelError
from .estimators import Method, SampleSet, ksd_nystrom, ksd_v_statistic_samples, DEFAULT_REL_TOL
from .kernels import KernelSpec
from .oracle import ksd_gaussian_closed_form
from .stein import GaussianMeasure

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 finaliser: a bijective 64-bit avalanche mix."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def replication_seed(base_seed: int, n: int, rep: int) -> int:
    """Seed of replication ``rep`` at sample size ``n``: ``mix(mix(mix(base) ^ n) ^ rep)``."""
    h = splitmix64(int(base_seed) & _MASK64)
    h = splitmix64(h ^ (int(n) & _MASK64))
    return splitmix64(h ^ (int(rep) & _MASK64))


@dataclass(frozen=True)
class AdversarialPair:
    p1: GaussianMeasure
    p0: GaussianMeasure
    rho: float
    axis: int  # 1-based


def adversarial_pair(n: int, d: int, axis_j: int = 1) -> AdversarialPair:
    """``(N(rho e_j, I), N(0, I))`` with ``rho = 1 / sqrt(n)``; ``axis_j`` is 1-based."""
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if int(d) != d or d < 1:
        raise InputError(f"d must be a positive integer, got {d!r}")
    if not 1 <= axis_j <= d:
        raise InputError(f"axis {axis_j} outside 1..{d}")
    rho = 1.0 / math.sqrt(n)
    mean = np.zeros(d)
    mean[axis_j - 1] = rho
    return AdversarialPair(GaussianMeasure(mean), GaussianMeasure.standard(d), rho, int(axis_j))


def _spd(S, d, name):
    S = np.eye(d) if S is None else np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape != (d, d):
        raise ModelError(f"{name} must be {d}x{d}, got {S.shape}")
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ModelError(f"{name} is not positive definite") from None
    return S


def kl_gaussians(mu1, sigma1, mu0, sigma0) -> float:
    """``KL(N(mu1, sigma1) || N(mu0, sigma0))``; ``None`` covariances mean identity.

    Written as ``tr(M - I) - log det M + delta^T sigma0^{-1} delta`` with
    ``M = sigma0^{-1} sigma1`` so equal covariances contribute exactly zero.
    """
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    mu0 = np.atleast_1d(np.asarray(mu0, dtype=float))
    if mu1.shape != mu0.shape or mu1.ndim != 1:
        raise InputError("means must be vectors of equal length")
    d = mu1.shape[0]
    S1 = _spd(sigma1, d, "sigma1")
    S0 = _spd(sigma0, d, "sigma0")
    delta = mu0 - mu1
    M = np.linalg.solve(S0, S1)
    trace_term = float(np.trace(M - np.eye(d)))
    _, logdet0 = np.linalg.slogdet(S0)
    _, logdet1 = np.linalg.slogdet(S1)
    maha = float(delta @ np.linalg.solve(S0, delta))
    return 0.5 * (trace_term + maha + (logdet0 - logdet1))


def kl_product(n: int, kl_single: float) -> float:
    """KL between n-fold products of the same pair: additive over coordinates."""
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if kl_single < 0:
        raise InputError(f"KL divergence cannot be negative, got {kl_single}")
    return n * kl_single


def le_cam_bound(alpha: float) -> float:
    """Two-point lower bound ``max(exp(-alpha) / 4, (1 - sqrt(alpha / 2)) / 2)`` on the error probability."""
    if not alpha >= 0:
        raise InputError(f"KL budget alpha must be non-negative, got {alpha!r}")
    return max(math.exp(-alpha) / 4.0, (1.0 - math.sqrt(alpha / 2.0)) / 2.0)


@dataclass(frozen=True)
class RiskRow:
    n: int
    mean_abs_error: float
    std_error: float
    reps: int
    method: Method


CSV_HEADER = ("n", "mean_abs_error", "std_error", "reps", "method")


@dataclass
class RiskCurve:
    rows: List[RiskRow] = field(default_factory=list)
    true_ksd: float = float("nan")

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise InputError("risk curve sample sizes must be strictly increasing")

    @property
    def n(self):
        return np.array([r.n for r in self.rows])

    @property
    def mean_abs_error(self):
        return np.array([r.mean_abs_error for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.n, repr(r.mean_abs_error), repr(r.std_error), r.reps, r.method.value])
        return buf.getvalue()


def _one_replication(target, spec, p_true, n, rep, method, base_seed, landmarks, rel_tol):
    seed = replication_seed(base_seed, n, rep)
    rng = np.random.default_rng(seed)
    samples = SampleSet(p_true.sample(n, rng), seed=seed)
    if method is Method.V_STATISTIC:
        return ksd_v_statistic_samples(target, spec, samples).ksd
    m = landmarks(n) if callable(landmarks) else int(landmarks)
    return ksd_nystrom(target, spec, samples, m, rng, rel_tol).ksd


def default_landmarks(n):
    return int(math.ceil(math.sqrt(n)))


def risk_sweep(target: GaussianMeasure, spec: KernelSpec, p_true: GaussianMeasure,
               n_grid: Sequence[int], reps: int = 200, method="v_statistic", base_seed: int = 0,
               landmarks=default_landmarks, rel_tol: float = DEFAULT_REL_TOL, n_jobs: int = 1) -> RiskCurve:
    """Monte Carlo estimate of ``E|KSD_hat - KSD|`` for each sample size in ``n_grid``.

    The target must be ``N(0, I)`` so the true value comes from the closed-form
    oracle. Each replication draws from its own generator seeded by
    :func:`replication_seed`, so results are identical for any ``n_jobs``.
    ``landmarks`` (Nystrom only) is an int or a function of ``n``; the default
    is ``ceil(sqrt(n))``.
    """
    method = Method.parse(method)
    if not target.is_standard:
        raise ModelError("risk_sweep needs the standard normal target for its oracle")
    if target.dim != spec.dim or p_true.dim != spec.dim:
        raise InputError("target, sampling distribution and kernel dimensions disagree")
    n_grid = [int(n) for n in n_grid]
    if not n_grid or any(n < 1 for n in n_grid):
        raise InputError("n_grid must be a non-empty list of positive sizes")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise InputError("n_grid must be strictly increasing")
    if reps < 2:
        raise InputError(f"need at least 2 replications, got {reps}")
    truth = ksd_gaussian_closed_form(spec.gamma, spec.dim, p_true.mean, p_true.covariance)

    rows = []
    pool = ThreadPoolExecutor(n_jobs) if n_jobs > 1 else None
    try:
        for n in n_grid:
            args = (target, spec, p_true, n)
            tail = (method, base_seed, landmarks, rel_tol)
            if pool is None:
                est = [_one_replication(*args, r, *tail) for r in range(reps)]
            else:
                est = list(pool.map(lambda r: _one_replication(*args, r, *tail), range(reps)))
            err = np.abs(np.array(est) - truth)
            rows.append(RiskRow(n, float(err.mean()), float(err.std(ddof=1) / math.sqrt(reps)), reps, method))
    finally:
        if pool is not None:
            pool.shutdown()
    return RiskCurve(rows, truth)


def rate_fit(curve) -> tuple:
    """Least-squares line through ``(log n, log mean_abs_error)``; returns ``(slope, intercept)``.

    ``curve`` is a :class:`RiskCurve` or a sequence of ``(n, error)`` pairs.
    """
    if isinstance(curve, RiskCurve):
        n, e = curve.n.astype(float), curve.mean_abs_error
    else:
        arr = np.asarray(curve, dtype=float)
        n, e = arr[:, 0], arr[:, 1]
    if n.size < 2:
        raise InputError("rate fit needs at least two points")
    if np.any(e <= 0) or np.any(n <= 0):
        raise InputError("rate fit needs positive sizes and errors (log undefined)")
    x = np.log(n)
    y = np.log(e)
    xm, ym = x.mean(), y.mean()
    slope = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    return slope, float(ym - slope * xm)
