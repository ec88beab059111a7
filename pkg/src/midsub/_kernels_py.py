"""Pure-Python implementations of the numerical kernels."""

from __future__ import annotations

import numpy as np


def power_iteration(M: np.ndarray, x0: np.ndarray, tol: float, max_iter: int,
                    stall: int = 2000):
    """Normalised power iteration with a Rayleigh-quotient estimate.

    Returns ``(lam, x, iterations, converged, residual)``. Iteration stops
    early when the residual has not halved over ``stall`` steps.
    """
    x = np.array(x0, dtype=complex)
    nrm = np.abs(x).max()
    if nrm == 0:
        return 0j, x, 0, False, np.inf
    x /= nrm
    lam = 0j
    res = np.inf
    best = np.inf
    mark = 0
    for it in range(1, max_iter + 1):
        y = M @ x
        ny = np.abs(y).max()
        if ny == 0.0:
            return 0j, x, it, True, 0.0
        lam = np.vdot(x, y) / np.vdot(x, x)
        res = np.abs(y - lam * x).max() / np.abs(x).max()
        x = y / ny
        if res <= tol * max(abs(lam), 1e-300):
            return lam, x, it, True, res
        if res < 0.5 * best:
            best = res
            mark = it
        elif it - mark > stall:
            break
    return lam, x, it, False, res


def reachable_positive_column(P: np.ndarray, l_max: int):
    """Smallest ``l <= l_max`` such that the boolean power ``P**l`` has a full column."""
    P = np.asarray(P, dtype=bool)
    Q = P.copy()
    Pi = P.astype(np.int64)
    for l in range(1, l_max + 1):
        if Q.all(axis=0).any():
            return l
        Q = (Q.astype(np.int64) @ Pi) > 0
    return None
