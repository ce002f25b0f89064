"""Globally adaptive Gauss-Kronrod cubature on boxes in R^d (small d).

Each cell is integrated with the tensor-product 15-point Kronrod rule; the
embedded tensor 7-point Gauss rule supplies the error estimate ``|K - G|``.
The cell with the largest estimate is bisected along its longest side until
the summed estimate drops below ``abs_tol``.
"""

from dataclasses import dataclass
import heapq
import itertools

import numpy as np

from .errors import ConvergenceError, InputError

# Kronrod abscissae on [-1, 1], non-negative half (QUADPACK qk15).
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# 7-point Gauss weights live on the odd-indexed Kronrod nodes and the centre.
_WG_HALF = np.array([0.0, 0.129484966168869693270611432679082, 0.0,
                     0.279705391489276667901467771423780, 0.0,
                     0.381830050505118944950369775488975, 0.0,
                     0.417959183673469387755102040816327])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS_WEIGHTS = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    cells: int


class _TensorRule:
    def __init__(self, dim):
        self.dim = dim
        grids = np.meshgrid(*([NODES] * dim), indexing="ij")
        self.nodes = np.stack([g.ravel() for g in grids], axis=1)
        wk = np.ones(1)
        wg = np.ones(1)
        for _ in range(dim):
            wk = np.multiply.outer(wk, KRONROD_WEIGHTS).ravel()
            wg = np.multiply.outer(wg, GAUSS_WEIGHTS).ravel()
        self.wk = wk
        self.wg = wg

    def apply(self, f, lo, hi):
        half = 0.5 * (hi - lo)
        vol = float(np.prod(half))
        vals = np.asarray(f(0.5 * (hi + lo) + self.nodes * half), dtype=float)
        k = vol * float(self.wk @ vals)
        g = vol * float(self.wg @ vals)
        return k, abs(k - g)


def integrate_box(f, lower, upper, abs_tol=1e-10, max_subdivisions=4000, initial_splits=4):
    """Integrate a vectorised ``f`` over the box ``[lower, upper]``.

    ``f`` receives an ``(N, d)`` array of points and returns ``N`` values.
    Raises :class:`ConvergenceError` when ``max_subdivisions`` bisections do
    not bring the error estimate below ``abs_tol``.
    """
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))
    if lo.shape != hi.shape or lo.ndim != 1 or not np.all(hi > lo):
        raise InputError("integration box needs matching lower < upper bounds")
    if abs_tol <= 0:
        raise InputError("abs_tol must be positive")
    rule = _TensorRule(lo.shape[0])
    counter = itertools.count()
    heap = []
    edges = [np.linspace(a, b, initial_splits + 1) for a, b in zip(lo, hi)]
    for cell in itertools.product(range(initial_splits), repeat=lo.shape[0]):
        clo = np.array([e[i] for e, i in zip(edges, cell)])
        chi = np.array([e[i + 1] for e, i in zip(edges, cell)])
        val, err = rule.apply(f, clo, chi)
        heapq.heappush(heap, (-err, next(counter), clo, chi, val))

    splits = 0
    total_err = sum(-item[0] for item in heap)
    while True:
        if total_err <= abs_tol:
            # Running totals drift; confirm with a fresh sum before stopping.
            total_err = sum(-item[0] for item in heap)
            if total_err <= abs_tol:
                break
        if splits >= max_subdivisions:
            value = float(sum(item[4] for item in heap))
            raise ConvergenceError("subdivision budget exhausted", value, total_err)
        neg_err, _, clo, chi, _ = heapq.heappop(heap)
        total_err += neg_err
        axis = int(np.argmax(chi - clo))
        mid = 0.5 * (clo[axis] + chi[axis])
        left_hi = chi.copy()
        left_hi[axis] = mid
        right_lo = clo.copy()
        right_lo[axis] = mid
        for a, b in ((clo, left_hi), (right_lo, chi)):
            val, err = rule.apply(f, a, b)
            total_err += err
            heapq.heappush(heap, (-err, next(counter), a, b, val))
        splits += 1

    # Sum cells in creation order so the result is independent of heap layout.
    cells = sorted(heap, key=lambda item: item[1])
    value = float(np.sum([item[4] for item in cells]))
    return QuadratureResult(value, total_err, len(cells))
