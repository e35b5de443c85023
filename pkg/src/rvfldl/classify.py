"""Label assignment on code vectors.

Two routes: a one-vs-rest soft-margin support vector classifier with the
inhomogeneous polynomial kernel ``(a.b + 1)^degree``, trained by pairwise
(SMO) updates with second-order working-set selection, and a direct
``argmax(W x)`` read-out of the learned classifier matrix.

Codes are passed column-per-sample, (K+L) x N, like everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SVCConvergenceError",
    "SVCModel",
    "argmax_label",
    "poly_kernel",
    "svc_decision",
    "svc_predict",
    "svc_train",
]

_TAU = 1e-12  # floor for non-positive curvature in the pair update


class SVCConvergenceError(RuntimeError):
    def __init__(self, message: str, violation: float):
        super().__init__(message)
        self.violation = violation


def poly_kernel(a, b, degree: int = 2):
    """``(a^T b + 1) ** degree``; for matrices, the kernel between columns."""
    if degree < 1:
        raise ValueError("degree must be a positive integer")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 1 and b.ndim == 1:
        if a.shape != b.shape:
            raise ValueError(f"vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
        return float((a @ b + 1.0) ** degree)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
    return (a.T @ b + 1.0) ** degree


@dataclass(frozen=True)
class SVCModel:
    """One-vs-rest machines sharing a support-vector pool.

    ``dual_coefs[k, i]`` holds ``alpha_i * y_i`` of machine ``k`` for pooled
    vector ``i`` (a column of ``support_vectors``); ``alphas`` keeps the
    unsigned multipliers for feasibility checks.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    intercepts: np.ndarray
    alphas: np.ndarray
    degree: int
    reg_C: float
    class_ids: np.ndarray
    iterations: tuple = ()

    @property
    def n_classes(self) -> int:
        return len(self.class_ids)


def _smo(Kmat: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int):
    """Solve ``min 1/2 a^T Q a - 1^T a`` s.t. ``y^T a = 0, 0 <= a <= C``.

    Working-set selection follows Fan, Chen & Lin (2005): the maximal
    violator ``i`` and the second-order best partner ``j``.
    Returns ``(alpha, rho, iterations)``; the decision is ``sum a y K - rho``.
    """
    n = y.shape[0]
    Q_diag = np.diag(Kmat).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    for it in range(max_iter):
        yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            gap = 0.0
        else:
            i = int(np.argmax(np.where(up, yg, -np.inf)))
            m_up = yg[i]
            M_low = np.min(np.where(low, yg, np.inf))
            gap = m_up - M_low
        if gap < tol:
            break
        b = m_up - yg
        cand = low & (b > 0)
        # Q_ii + Q_tt - 2 y_i y_t Q_it reduces to K_ii + K_tt - 2 K_it
        a = Q_diag[i] + Q_diag - 2.0 * Kmat[i]
        a = np.where(a > 0, a, _TAU)
        j = int(np.argmin(np.where(cand, -(b * b) / a, np.inf)))

        yi, yj = y[i], y[j]
        Kij = Kmat[i, j]
        quad = max(Q_diag[i] + Q_diag[j] - 2.0 * Kij, _TAU)
        ai_old, aj_old = alpha[i], alpha[j]
        if yi != yj:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        dai, daj = ai - ai_old, aj - aj_old
        grad += y * (yi * dai * Kmat[i] + yj * daj * Kmat[j])
    else:
        raise SVCConvergenceError(
            f"SMO did not converge in {max_iter} pair updates (KKT gap {gap:.3g})", float(gap)
        )

    yg = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(-np.mean(yg[free]))
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = np.max(yg[up]) if up.any() else 0.0
        lo = np.min(yg[low]) if low.any() else 0.0
        rho = float(-(hi + lo) / 2.0)
    return alpha, rho, it


def svc_train(codes, labels, degree: int = 2, reg_C: float = 1.0, tol: float = 1e-3,
              max_iter: int = 1_000_000) -> SVCModel:
    """Train one binary machine per class against the rest."""
    X = np.asarray(getattr(codes, "values", codes), dtype=np.float64)
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[1] != labels.shape[0]:
        raise ValueError(f"{labels.shape[0]} labels for {X.shape[-1]} code columns")
    if not reg_C > 0:
        raise ValueError("reg_C must be positive")
    class_ids = np.unique(labels)
    if class_ids.size < 2:
        raise ValueError("one-vs-rest training needs at least two classes")

    Kmat = poly_kernel(X, X, degree)
    alphas, coefs, rhos, iters = [], [], [], []
    for cls in class_ids:
        y = np.where(labels == cls, 1.0, -1.0)
        alpha, rho, it = _smo(Kmat, y, reg_C, tol, max_iter)
        alphas.append(alpha)
        coefs.append(alpha * y)
        rhos.append(rho)
        iters.append(it)
    alphas = np.array(alphas)
    coefs = np.array(coefs)
    used = np.flatnonzero(np.any(alphas > 0, axis=0))
    return SVCModel(
        support_vectors=X[:, used].copy(),
        dual_coefs=coefs[:, used],
        intercepts=-np.array(rhos),
        alphas=alphas[:, used],
        degree=degree,
        reg_C=reg_C,
        class_ids=class_ids,
        iterations=tuple(iters),
    )


def svc_decision(model: SVCModel, x_q) -> np.ndarray:
    """Decision values, n_classes x M for a block of queries (vector for one)."""
    x = np.asarray(x_q, dtype=np.float64)
    single = x.ndim == 1
    Xq = x[:, None] if single else x
    if Xq.shape[0] != model.support_vectors.shape[0]:
        raise ValueError(
            f"query length {Xq.shape[0]} does not match support vectors of length {model.support_vectors.shape[0]}"
        )
    scores = model.dual_coefs @ poly_kernel(model.support_vectors, Xq, model.degree) + model.intercepts[:, None]
    return scores[:, 0] if single else scores


def svc_predict(model: SVCModel, x_q):
    """Class id with the largest decision value; ties go to the lowest id."""
    scores = svc_decision(model, x_q)
    idx = np.argmax(scores, axis=0)
    return model.class_ids[idx]


def argmax_label(W, x_q):
    """Row index of the largest entry of ``W x``; ties go to the lowest index."""
    W = np.asarray(getattr(W, "values", W), dtype=np.float64)
    x = np.asarray(x_q, dtype=np.float64)
    if x.shape[0] != W.shape[1]:
        raise ValueError(f"code length {x.shape[0]} does not match classifier width {W.shape[1]}")
    return np.argmax(W @ x, axis=0)
