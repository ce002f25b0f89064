"""Ground-truth KSD between the standard normal target and a Gaussian ``N(mu, Sigma)``.

Two independent routes: a closed form obtained from Gaussian moment
identities, and adaptive cubature of the spectral (characteristic-function)
integral

    KSD^2 = int (|mu|^2 + |(I - Sigma) w|^2) exp(-w^T Sigma w) dLambda(w),

where ``dLambda`` is the spectral density of the Gaussian kernel. The two
must agree; the cubature is the check on the closed form.
"""

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np
from scipy.special import gammaincc

from .errors import InputError, ModelError
from .kernels import KernelSpec, spectral_density
from .quadrature import QuadratureResult, integrate_box

QUADRATURE_MAX_DIM = 3


def as_covariance(sigma, d):
    """Normalise a covariance argument; ``None`` means the identity.

    Accepts ``None``/``"identity"``, a scalar ``s`` (meaning ``s * I``), a
    length-``d`` vector of variances, or a ``d x d`` matrix.
    """
    if sigma is None or (isinstance(sigma, str) and sigma.lower() in {"identity", "i", "eye"}):
        return None
    cov = np.asarray(sigma, dtype=float)
    if cov.ndim == 0 or cov.size == 1 and d == 1:
        cov = float(cov.reshape(())) * np.eye(d)
    elif cov.ndim == 1:
        if cov.shape != (d,):
            raise ModelError(f"diagonal covariance needs {d} entries, got {cov.size}")
        cov = np.diag(cov)
    if cov.shape != (d, d):
        raise ModelError(f"covariance must be {d}x{d}, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)) or np.abs(cov - cov.T).max() > 1e-12 * max(np.abs(cov).max(), 1e-300):
        raise ModelError("covariance must be finite and symmetric")
    cov = 0.5 * (cov + cov.T)
    if np.linalg.eigvalsh(cov)[0] <= 0:
        raise ModelError("covariance is not positive definite")
    if np.array_equal(cov, np.eye(d)):
        return None
    return cov


def _check(gamma, d, mu):
    if not (np.isfinite(gamma) and gamma > 0):
        raise InputError(f"gamma must be positive, got {gamma!r}")
    if int(d) != d or d < 1:
        raise InputError(f"d must be a positive integer, got {d!r}")
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.shape != (d,):
        raise InputError(f"mu must have length {d}, got shape {mu.shape}")
    return mu


def ksd_squared_gaussian_closed_form(gamma, d, mu, sigma=None) -> float:
    mu = _check(gamma, d, mu)
    cov = as_covariance(sigma, d)
    mu2 = float(mu @ mu)
    if cov is None:
        return mu2 * (4.0 * gamma + 1.0) ** (-d / 2.0)
    A = cov + np.eye(d) / (4.0 * gamma)
    L = np.linalg.cholesky(A)
    logdet = 2.0 * float(np.log(np.diag(L)).sum())
    # tr((I - S)^2 A^{-1}) = ||L^{-1} (I - S)||_F^2 with A = L L^T.
    W = np.linalg.solve(L, np.eye(d) - cov)
    trace_term = float(np.einsum("ij,ij->", W, W))
    return (4.0 * gamma) ** (-d / 2.0) * math.exp(-0.5 * logdet) * (mu2 + 0.5 * trace_term)


def ksd_gaussian_closed_form(gamma, d, mu, sigma=None) -> float:
    """Exact ``KSD(N(0, I), N(mu, sigma))`` for the Gaussian kernel with bandwidth ``gamma``.

    With identity covariance this is ``|mu| (4 gamma + 1)^(-d/4)``.
    """
    mu = _check(gamma, d, mu)
    if as_covariance(sigma, d) is None:
        return math.hypot(*mu) * (4.0 * gamma + 1.0) ** (-d / 4.0)  # hypot avoids underflow
    return math.sqrt(ksd_squared_gaussian_closed_form(gamma, d, mu, sigma))


def lemma2_integrand(mu, sigma, omega):
    """``(|mu|^2 + |(I - Sigma) w|^2) * |psi_P(w)|^2`` with ``|psi_P(w)|^2 = exp(-w^T Sigma w)``.

    ``omega`` is one frequency (returns a float) or an ``(N, d)`` batch.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    d = mu.shape[0]
    w = np.asarray(omega, dtype=float)
    single = w.ndim <= 1
    w = np.atleast_2d(w.reshape(1, -1) if single else w)
    if w.shape[1] != d:
        raise InputError(f"omega must have {d} components")
    cov = as_covariance(sigma, d)
    if cov is None:
        vals = float(mu @ mu) * np.exp(-np.einsum("ij,ij->i", w, w))
    else:
        resid = w - w @ cov
        quad = np.einsum("ij,ij->i", w @ cov, w)
        vals = (float(mu @ mu) + np.einsum("ij,ij->i", resid, resid)) * np.exp(-quad)
    return float(vals[0]) if single else vals


@dataclass(frozen=True)
class QuadratureConfig:
    """Cubature settings. ``truncation_radius=None`` picks the radius automatically."""

    truncation_radius: Optional[float] = None
    abs_tol: float = 1e-11
    max_subdivisions: int = 4000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise InputError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise InputError("max_subdivisions must be positive")
        if self.truncation_radius is not None and not self.truncation_radius > 0:
            raise InputError("truncation_radius must be positive")


def _tail_bound(radius, gamma, d, mu2, resid_norm2, lam):
    """Upper bound on the integrand's mass outside the ball of the given radius.

    Uses ``integrand <= c (|mu|^2 + |I - Sigma|^2 |w|^2) exp(-lam |w|^2)`` with
    ``lam`` the smallest eigenvalue of ``Sigma + I / (4 gamma)`` and the
    chi-square tail of a Gaussian with covariance ``I / (2 lam)``.
    """
    c = (4.0 * math.pi * gamma) ** (-d / 2.0) * (math.pi / lam) ** (d / 2.0)
    x = lam * radius * radius
    return c * (mu2 * gammaincc(d / 2.0, x) + resid_norm2 * d / (2.0 * lam) * gammaincc(d / 2.0 + 1.0, x))


def truncation_radius(gamma, d, mu, sigma, abs_tol):
    """Smallest radius (on a 1.05 grid) whose discarded tail is below ``abs_tol / 10``."""
    mu = _check(gamma, d, mu)
    cov = as_covariance(sigma, d)
    cov_m = np.eye(d) if cov is None else cov
    lam = float(np.linalg.eigvalsh(cov_m + np.eye(d) / (4.0 * gamma))[0])
    resid_norm2 = float(np.linalg.norm(np.eye(d) - cov_m, 2)) ** 2
    mu2 = float(mu @ mu)
    radius = math.sqrt(math.log(10.0 / abs_tol) / lam)
    while _tail_bound(radius, gamma, d, mu2, resid_norm2, lam) > abs_tol / 10.0:
        radius *= 1.05
    return radius


def ksd_squared_quadrature(gamma, d, mu, sigma=None, cfg: Optional[QuadratureConfig] = None) -> QuadratureResult:
    """Cubature estimate of ``KSD^2`` with its error bound (truncation included)."""
    cfg = cfg or QuadratureConfig()
    mu = _check(gamma, d, mu)
    if d > QUADRATURE_MAX_DIM:
        raise InputError(f"quadrature oracle supports d <= {QUADRATURE_MAX_DIM}, got {d}")
    cov = as_covariance(sigma, d)
    auto = truncation_radius(gamma, d, mu, cov, cfg.abs_tol)
    radius = auto if cfg.truncation_radius is None else float(cfg.truncation_radius)
    if radius < auto:
        raise InputError(f"truncation radius {radius} leaves more than abs_tol/10 of the "
                         f"integrand outside the box (need >= {auto:.6g})")
    spec = KernelSpec(gamma, d)

    def integrand(w):
        return lemma2_integrand(mu, cov, w) * spectral_density(spec, w)

    res = integrate_box(integrand, -radius * np.ones(d), radius * np.ones(d),
                        abs_tol=0.9 * cfg.abs_tol, max_subdivisions=cfg.max_subdivisions)
    return QuadratureResult(res.value, res.error + cfg.abs_tol / 10.0, res.cells)


def ksd_quadrature(gamma, d, mu, sigma=None, cfg: Optional[QuadratureConfig] = None) -> float:
    return math.sqrt(max(ksd_squared_quadrature(gamma, d, mu, sigma, cfg).value, 0.0))


def minimax_separation(n, gamma, d) -> float:
    """Half-separation ``s_n = (4 gamma + 1)^(-d/4) / (2 sqrt(n))`` of the adversarial Gaussian pair."""
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if not (np.isfinite(gamma) and gamma > 0):
        raise InputError(f"gamma must be positive, got {gamma!r}")
    if int(d) != d or d < 1:
        raise InputError(f"d must be a positive integer, got {d!r}")
    return (4.0 * gamma + 1.0) ** (-d / 4.0) / (2.0 * math.sqrt(n))
