"""The tilted-perturbation lower bound on a finite state space.

A model is a probability vector ``p0`` over K states together with Stein
features ``psi`` (one row per state) that have mean zero under ``p0``. Then
``KSD(p0, p) = |p^T psi|`` and every quantity in the two-point argument is
exactly computable.
"""

from dataclasses import dataclass
import json
import math
from typing import List, Optional, Sequence

import numpy as np

from .errors import DegeneracyError, InputError, ModelError, NegativityError
from .minimax import le_cam_bound

MODEL_MEAN_TOL = 1e-10
PHI_MEAN_TOL = 1e-12
PROB_SUM_TOL = 1e-12
KL_BUDGET = math.log(2.0)


def _prob_vector(p, name, tol=PROB_SUM_TOL):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InputError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ModelError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > tol:
        raise ModelError(f"{name} sums to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True, eq=False)
class FiniteDomainModel:
    p0: np.ndarray
    psi: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        p0 = _prob_vector(self.p0, "p0")
        psi = np.asarray(self.psi, dtype=float)
        if psi.ndim == 1:
            psi = psi[:, None]
        if psi.shape[0] != p0.size:
            raise ModelError(f"psi has {psi.shape[0]} rows for {p0.size} states")
        if not np.all(np.isfinite(psi)):
            raise ModelError("psi has non-finite entries")
        if np.linalg.norm(p0 @ psi) > MODEL_MEAN_TOL:
            raise ModelError("Stein features do not have mean zero under p0")
        if self.labels is not None and len(self.labels) != p0.size:
            raise ModelError("one label per state required")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def from_raw_features(cls, p0, raw, labels=None):
        """Build a model by centring arbitrary features under ``p0``."""
        p0 = _prob_vector(p0, "p0")
        raw = np.asarray(raw, dtype=float)
        if raw.ndim == 1:
            raw = raw[:, None]
        return cls(p0, raw - p0 @ raw, labels)

    @property
    def K(self):
        return self.p0.size

    @property
    def feature_dim(self):
        return self.psi.shape[1]


@dataclass(frozen=True)
class PerturbationSpec:
    phi: np.ndarray
    epsilon: float


def center_phi(raw, p0) -> np.ndarray:
    """Subtract the ``p0``-mean from ``raw``; constant-on-support input is rejected."""
    p0 = _prob_vector(p0, "p0")
    raw = np.asarray(raw, dtype=float)
    if raw.shape != p0.shape:
        raise InputError(f"phi needs {p0.size} entries, got {raw.size}")
    support = raw[p0 > 0]
    if np.all(support == support[0]):
        raise DegeneracyError("perturbation is constant on the support of p0, so it centres to zero")
    mean = float(p0 @ raw)
    phi = raw - mean
    # A second pass removes the rounding residue of the first.
    return phi - float(p0 @ phi)


def _check_phi(model, phi):
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (model.K,):
        raise InputError(f"phi needs {model.K} entries, got shape {phi.shape}")
    if abs(float(model.p0 @ phi)) > PHI_MEAN_TOL:
        raise InputError("phi is not centred under p0 (use center_phi)")
    if not np.any(phi[model.p0 > 0]):
        raise DegeneracyError("phi vanishes on the support of p0")
    return phi


def perturb(model: FiniteDomainModel, spec: PerturbationSpec) -> np.ndarray:
    """Tilted distribution ``p_k = (1 + epsilon * phi_k) p0_k``."""
    phi = _check_phi(model, spec.phi)
    if 1.0 + spec.epsilon * phi.min() < 0 or 1.0 + spec.epsilon * phi.max() < 0:
        raise NegativityError(f"1 + epsilon * phi < 0 for epsilon={spec.epsilon}")
    return (1.0 + spec.epsilon * phi) * model.p0


def _check_p(model, p):
    p = np.asarray(p, dtype=float)
    if p.shape != (model.K,):
        raise InputError(f"p needs {model.K} entries, got shape {p.shape}")
    return p


def _shift(model, p):
    # p^T psi = (p - p0)^T psi since the features have mean zero under p0.
    # Working with the difference avoids summing O(1) terms down to a tiny
    # KSD, so relative accuracy does not degrade as p approaches p0.
    return _check_p(model, p) - model.p0


def ksd_finite_exact(model: FiniteDomainModel, p) -> float:
    """Norm of the feature mean, ``|p^T psi|``."""
    return float(np.linalg.norm(_shift(model, p) @ model.psi))


def ksd_finite_bruteforce(model: FiniteDomainModel, p) -> float:
    """``sqrt(sum_{k,l} q_k q_l <psi_k, psi_l>)`` with ``q = p - p0``, by an explicit double sum."""
    q = _shift(model, p)
    gram = model.psi @ model.psi.T
    total = 0.0
    for k in range(model.K):
        if q[k] == 0.0:
            continue
        total += q[k] * float(np.dot(q, gram[k]))
    return math.sqrt(max(total, 0.0))


def kl_finite(p, q) -> float:
    """``KL(p || q)``; returns ``inf`` when ``p`` is not absolutely continuous w.r.t. ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise InputError("KL needs two probability vectors of equal length")
    pos = p > 0
    if np.any(q[pos] <= 0):
        return math.inf
    # sum_k q_k f(r_k) with r = p/q - 1 and f(r) = (1 + r) log1p(r) - r >= 0.
    # Equal to sum p log(p/q) because both vectors sum to one, but with no
    # cancellation between terms, so tiny perturbations keep full precision.
    live = q > 0
    r = (p[live] - q[live]) / q[live]
    return float(np.sum(q[live] * _xlogx_excess(r)))


_SERIES_CUTOFF = 0.1
_SERIES_TERMS = 20


def _xlogx_excess(r):
    """``(1 + r) log1p(r) - r`` for ``r >= -1``, via its power series near zero."""
    out = np.empty_like(r)
    small = np.abs(r) < _SERIES_CUTOFF
    big = ~small
    rb = r[big]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[big] = np.where(rb == -1.0, 1.0, (1.0 + rb) * np.log1p(rb) - rb)
    rs = r[small]
    acc = np.zeros_like(rs)
    # sum_{k>=2} (-1)^k r^k / (k (k - 1)), Horner from the top
    for k in range(_SERIES_TERMS + 1, 1, -1):
        acc = acc * rs + (-1.0) ** k / (k * (k - 1))
    out[small] = acc * rs * rs
    return out


@dataclass(frozen=True)
class LowerBoundRow:
    n: int
    epsilon: float
    feasible: bool
    ksd: float
    two_s: float
    ksd_sqrt_n: float
    n_kl: float
    kl_budget: float
    within_budget: bool
    le_cam_prob: float


def lower_bound_demo(model: FiniteDomainModel, phi, n_grid: Sequence[int]) -> List[LowerBoundRow]:
    """Tabulate the two-point construction with ``epsilon_n = sqrt(ln 2 / M2) / sqrt(n)``.

    ``M2 = E_p0[phi^2]`` and ``C_phi = |E_p0[phi psi]|``. For each feasible
    ``n`` (tilt stays non-negative) the row holds ``KSD(p0, p_n)`` (which equals
    ``epsilon_n * C_phi``) and ``n * KL(p_n || p0)``, which must not exceed
    ``ln 2``. Infeasible sizes are reported with NaN entries, not dropped.
    """
    phi = _check_phi(model, phi)
    m2 = float(model.p0 @ phi**2)
    c = math.sqrt(KL_BUDGET / m2)
    c_phi = float(np.linalg.norm((model.p0 * phi) @ model.psi))
    bound = le_cam_bound(KL_BUDGET)
    rows = []
    for n in n_grid:
        n = int(n)
        if n < 1:
            raise InputError(f"sample sizes must be positive, got {n}")
        eps = c / math.sqrt(n)
        if 1.0 + eps * phi.min() < 0:
            nan = float("nan")
            rows.append(LowerBoundRow(n, eps, False, nan, eps * c_phi, nan, nan, KL_BUDGET, False, bound))
            continue
        pn = perturb(model, PerturbationSpec(phi, eps))
        ksd = ksd_finite_exact(model, pn)
        n_kl = n * kl_finite(pn, model.p0)
        ok = n_kl <= KL_BUDGET
        if not ok:
            raise ModelError(f"n*KL={n_kl!r} exceeds ln 2 at n={n}; the KL bound was violated")
        rows.append(LowerBoundRow(n, eps, True, ksd, eps * c_phi, ksd * math.sqrt(n), n_kl,
                                  KL_BUDGET, ok, bound))
    return rows


def load_model(path):
    """Read a model document; returns ``(model, raw_phi_or_None)``.

    JSON object with integer ``K`` and ``D``, arrays ``p0`` (K), ``psi``
    (K*D, row-major) and optionally ``phi`` (K), ``labels`` (K) and
    ``center_psi`` (bool; centre the features under ``p0`` on load).
    """
    with open(path) as fh:
        doc = json.load(fh)
    return model_from_dict(doc)


def model_from_dict(doc):
    try:
        K = int(doc["K"])
        D = int(doc["D"])
        p0 = np.asarray(doc["p0"], dtype=float)
        psi = np.asarray(doc["psi"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model document: {exc}") from None
    if p0.shape != (K,) or psi.size != K * D:
        raise InputError(f"model document sizes disagree with K={K}, D={D}")
    psi = psi.reshape(K, D)
    labels = tuple(doc["labels"]) if doc.get("labels") is not None else None
    if doc.get("center_psi", False):
        model = FiniteDomainModel.from_raw_features(p0, psi, labels)
    else:
        model = FiniteDomainModel(p0, psi, labels)
    phi = doc.get("phi")
    if phi is not None:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (K,):
            raise InputError(f"phi needs {K} entries")
    return model, phi
