"""Kernel Stein discrepancy estimators, exact Gaussian oracles and minimax lower-bound checks."""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DegeneracyError, InputError, KSDError, ModelError,
                     NegativityError)
from .kernels import KernelSpec, kernel_derivatives, kernel_eval, spectral_density
from .stein import GaussianMeasure, SteinGram, score, stein_gram, stein_kernel_eval
from .estimators import (EstimatorResult, Method, SampleSet, ksd_nystrom, ksd_v_statistic,
                         ksd_v_statistic_samples, psd_pseudo_solve, sample_landmarks)
from .oracle import (QuadratureConfig, ksd_gaussian_closed_form, ksd_quadrature,
                     ksd_squared_quadrature, lemma2_integrand, minimax_separation)
from .minimax import (AdversarialPair, RiskCurve, adversarial_pair, kl_gaussians, kl_product,
                      le_cam_bound, rate_fit, risk_sweep)
from .finite import (FiniteDomainModel, PerturbationSpec, center_phi, kl_finite,
                     ksd_finite_bruteforce, ksd_finite_exact, lower_bound_demo, perturb)
