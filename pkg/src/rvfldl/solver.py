"""Closed-form ridge solves for the dictionary, the classifier and the codes.

Notation: ``Y`` is d x N data, ``X1`` the (K+L) x N enhanced codes, ``H`` the
c x N one-hot labels, ``D1`` the d x (K+L) dictionary and ``W`` the
c x (K+L) classifier.  All systems are symmetric positive definite and are
solved by Cholesky; nothing here calls a singular-value routine.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._linalg import JITTER_LADDER, FactorizationError, spd_solve

logger = logging.getLogger(__name__)

__all__ = [
    "RidgeParams",
    "code_query",
    "dual_ridge_codes",
    "objective_joint",
    "objective_unsupervised",
    "solve_classifier",
    "solve_dictionary",
    "update_coefficients",
]


@dataclass(frozen=True)
class RidgeParams:
    mu1: float = 0.2
    mu2: float = 0.2
    mu3: float = 0.1
    eta: float = 0.01

    def __post_init__(self):
        for name in ("mu1", "mu2", "mu3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.eta >= 0:
            raise ValueError("eta must be non-negative")


def _values(m):
    return np.asarray(getattr(m, "values", m), dtype=np.float64)


def _right_ridge(T, X1, mu, eta, what):
    """``T X1^T (X1 X1^T + mu I)^-1``, falling back to ``eta`` jitter when mu = 0."""
    T, X1 = _values(T), _values(X1)
    if T.ndim != 2 or X1.ndim != 2 or T.shape[1] != X1.shape[1]:
        raise ValueError(
            f"{what}: targets have {T.shape[-1]} columns but codes have {X1.shape[-1]}"
        )
    gram = X1 @ X1.T
    rhs = X1 @ T.T
    n = gram.shape[0]
    if mu > 0:
        return spd_solve(gram + mu * np.eye(n), rhs, what=f"{what} Gram").T
    try:
        return spd_solve(gram, rhs, jitters=(0.0,), what=f"{what} Gram").T
    except FactorizationError:
        if eta <= 0:
            raise
        logger.warning("%s: X1 X1^T is singular with zero penalty; adding eta=%g", what, eta)
        return spd_solve(gram + eta * np.eye(n), rhs, jitters=JITTER_LADDER, what=f"{what} Gram").T


def solve_dictionary(Y, X1, mu1: float = 0.2, eta: float = 0.01) -> np.ndarray:
    """Minimiser of ``||Y - D1 X1||_F^2 + mu1 ||D1||_F^2``."""
    return _right_ridge(Y, X1, mu1, eta, "dictionary solve")


def solve_classifier(H, X1, mu2: float = 0.2, eta: float = 0.01) -> np.ndarray:
    """Minimiser of ``||H - W X1||_F^2 + mu2 ||W||_F^2``."""
    return _right_ridge(H, X1, mu2, eta, "classifier solve")


def _coding_system(D1, W, params: RidgeParams):
    D1 = _values(D1)
    W = None if W is None else _values(W)
    A = D1.T @ D1 + params.eta * np.eye(D1.shape[1])
    if W is not None and params.mu3:
        if W.shape[1] != D1.shape[1]:
            raise ValueError(f"classifier has {W.shape[1]} columns, dictionary has {D1.shape[1]}")
        A += params.mu3 * (W.T @ W)
    return D1, W, A


def update_coefficients(Y, H, D1, W, params: RidgeParams) -> np.ndarray:
    """Joint code update ``(D1^T D1 + mu3 W^T W + eta I)^-1 (D1^T Y + mu3 W^T H)``."""
    Y = _values(Y)
    D1, W, A = _coding_system(D1, W, params)
    if Y.shape[0] != D1.shape[0]:
        raise ValueError(f"data has d={Y.shape[0]}, dictionary has d={D1.shape[0]}")
    rhs = D1.T @ Y
    if H is not None and W is not None and params.mu3:
        H = _values(H)
        if H.shape != (W.shape[0], Y.shape[1]):
            raise ValueError(f"label matrix shape {H.shape} does not match c={W.shape[0]}, N={Y.shape[1]}")
        rhs = rhs + params.mu3 * (W.T @ H)
    return spd_solve(A, rhs, what="code update system")


def code_query(y_q, D1, W, params: RidgeParams) -> np.ndarray:
    """Code of a query without label information.

    Accepts a d-vector or a d x M block of queries.
    """
    y = _values(y_q)
    single = y.ndim == 1
    Yq = y[:, None] if single else y
    D1, W, A = _coding_system(D1, W, params)
    if Yq.shape[0] != D1.shape[0]:
        raise ValueError(f"query has d={Yq.shape[0]}, dictionary has d={D1.shape[0]}")
    codes = spd_solve(A, D1.T @ Yq, what="query coding system")
    return codes[:, 0] if single else codes


def dual_ridge_codes(Y, D1, mu1: float = 0.2, eta: float = 0.01) -> np.ndarray:
    """Label-free code update ``D1^T (D1 D1^T + mu1 I)^-1 Y``."""
    Y, D1 = _values(Y), _values(D1)
    reg = mu1 if mu1 > 0 else eta
    return D1.T @ spd_solve(D1 @ D1.T + reg * np.eye(D1.shape[0]), Y, what="dual ridge system")


def objective_unsupervised(Y, D1, X1, mu1: float) -> float:
    Y, D1, X1 = _values(Y), _values(D1), _values(X1)
    R = Y - D1 @ X1
    return float(np.sum(R * R) + mu1 * np.sum(D1 * D1))


def objective_joint(Y, H, D1, W, X1, params: RidgeParams) -> float:
    """``||Y - D1 X1||^2 + mu3 ||H - W X1||^2 + mu1 ||D1||^2 + mu2 ||W||^2``."""
    Y, H, D1, W, X1 = map(_values, (Y, H, D1, W, X1))
    R = Y - D1 @ X1
    S = H - W @ X1
    return float(
        np.sum(R * R)
        + params.mu3 * np.sum(S * S)
        + params.mu1 * np.sum(D1 * D1)
        + params.mu2 * np.sum(W * W)
    )
