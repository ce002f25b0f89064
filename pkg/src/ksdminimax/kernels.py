"""Gaussian RBF kernel ``k(x, y) = exp(-gamma * ||x - y||^2)``.

Closed-form first derivatives, the trace of the mixed second derivative and
the Bochner spectral density. Only the Gaussian family is provided.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class KernelSpec:
    """Bandwidth ``gamma`` (inverse squared length-scale) and ambient dimension."""

    gamma: float
    dim: int

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InputError(f"kernel gamma must be a positive finite number, got {self.gamma!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"kernel dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "dim", int(self.dim))


def _vec(spec, v, name):
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.shape != (spec.dim,):
        raise InputError(f"{name} must have length {spec.dim}, got shape {v.shape}")
    return v


def kernel_eval(spec: KernelSpec, x, y) -> float:
    x = _vec(spec, x, "x")
    y = _vec(spec, y, "y")
    diff = x - y
    return math.exp(-spec.gamma * float(diff @ diff))


def kernel_derivatives(spec: KernelSpec, x, y):
    """Return ``(grad_x, grad_y, mixed_trace)`` of the kernel at ``(x, y)``.

    ``mixed_trace`` is ``sum_j d^2 k / (dx_j dy_j)``, which for this kernel is
    ``(2 gamma d - 4 gamma^2 ||x - y||^2) k(x, y)``.
    """
    x = _vec(spec, x, "x")
    y = _vec(spec, y, "y")
    g = spec.gamma
    diff = x - y
    r2 = float(diff @ diff)
    k = math.exp(-g * r2)
    grad_x = -2.0 * g * k * diff
    mixed = (2.0 * g * spec.dim - 4.0 * g * g * r2) * k
    return grad_x, -grad_x, mixed


def spectral_density(spec: KernelSpec, omega):
    """Lebesgue density of the spectral measure, ``(4 pi gamma)^(-d/2) exp(-||w||^2 / (4 gamma))``.

    ``omega`` may be a single frequency of length ``dim`` (returns a float) or
    an ``(N, dim)`` batch (returns an array of length N). The measure has total
    mass ``k(0, 0) = 1``.
    """
    w = np.asarray(omega, dtype=float)
    single = w.ndim <= 1
    if w.ndim == 0:
        w = w.reshape(1)
    w2 = np.atleast_2d(w)
    if w2.shape[1] != spec.dim:
        raise InputError(f"omega must have {spec.dim} components, got shape {w.shape}")
    norm = (4.0 * math.pi * spec.gamma) ** (-spec.dim / 2.0)
    dens = norm * np.exp(-np.einsum("ij,ij->i", w2, w2) / (4.0 * spec.gamma))
    return float(dens[0]) if single else dens
