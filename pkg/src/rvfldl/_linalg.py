"""Cholesky-based SPD solves with escalating diagonal jitter.

Every linear system in the package goes through here so the whole code
path stays free of singular-value routines.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

logger = logging.getLogger(__name__)

JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6)


class FactorizationError(LinAlgError):
    """Raised when a matrix stays non positive definite after max jitter."""


def _is_degenerate(factor: np.ndarray, diag_max: float) -> bool:
    # LAPACK may accept a numerically singular PSD matrix with a tiny pivot
    pivots = np.abs(np.diag(factor))
    n = factor.shape[0]
    return bool(pivots.min() ** 2 <= n * np.finfo(float).eps * max(diag_max, np.finfo(float).tiny))


def spd_factor(a: np.ndarray, jitters=JITTER_LADDER, what: str = "matrix"):
    """Cholesky-factor a symmetric matrix, adding ``j * I`` for ``j`` in ``jitters``.

    Returns ``(cho, jitter)`` where ``cho`` is a ``cho_factor`` pair (lower
    triangular) and ``jitter`` the diagonal shift that was finally used.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    a = 0.5 * (a + a.T)
    eye = np.eye(a.shape[0])
    diag_max = float(np.max(np.abs(np.diag(a)))) if a.size else 0.0
    for jitter in jitters:
        shifted = a + jitter * eye if jitter else a
        try:
            cho = cho_factor(shifted, lower=True, check_finite=True)
        except LinAlgError:
            continue
        if jitter == 0.0 and _is_degenerate(cho[0], diag_max):
            continue
        if jitter:
            logger.debug("%s factorised with diagonal jitter %g", what, jitter)
        return cho, jitter
    raise FactorizationError(
        f"{what} of size {a.shape[0]} is not positive definite even with jitter {jitters[-1]:g}"
    )


def spd_solve(a: np.ndarray, b: np.ndarray, jitters=JITTER_LADDER, what: str = "matrix"):
    """Solve ``a @ x = b`` for symmetric positive definite ``a``."""
    cho, _ = spd_factor(a, jitters, what)
    return cho_solve(cho, b, check_finite=False)


def spd_inverse(a: np.ndarray, jitters=JITTER_LADDER, what: str = "matrix"):
    cho, _ = spd_factor(a, jitters, what)
    inv = cho_solve(cho, np.eye(a.shape[0]), check_finite=False)
    return 0.5 * (inv + inv.T)


def lower_factor(cho) -> np.ndarray:
    """Explicit lower-triangular factor from a ``cho_factor`` pair."""
    return np.tril(cho[0])
