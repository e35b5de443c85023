"""Sparse coding against a fixed dictionary under a regularized Horseshoe prior.

Given local shrinkages ``lambda_i`` drawn from Half-Cauchy(0, 1), a global
shrinkage ``tau`` and a noise variance ``sigma2``, the coefficients follow
the Gaussian conditional posterior

    mean = tau^2 Lam (tau^2 Lam + sigma2 G^-1)^-1 X_ridge
    cov  = (Lam^-1 / tau^2 + D^T D / sigma2)^-1

with ``Lam = diag(lambda_i^2)``, ``G = D^T D + eta I`` and
``X_ridge = G^-1 D^T Y``.  One coefficient column is sampled per observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import JITTER_LADDER, lower_factor, spd_factor, spd_inverse, spd_solve
from .rand import HalfCauchyParams, RandomStream, sample_half_cauchy

__all__ = [
    "CoefficientMatrix",
    "HSParams",
    "HSPosterior",
    "SPARSITY_RATIO",
    "effective_sparsity",
    "hs_posterior",
    "hs_sparse_code",
    "init_dictionary",
    "ridge_pre_estimate",
    "sample_coefficients",
]

#: Entries below this fraction of max|X| count as zero in reported sparsity.
SPARSITY_RATIO = 1e-3


@dataclass(frozen=True)
class HSParams:
    tau: float = 1.0
    sigma2: float = 1.0
    eta: float = 0.01
    lam: np.ndarray | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.eta >= 0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")
        if self.lam is not None:
            lam = np.asarray(self.lam, dtype=np.float64)
            if lam.ndim != 1 or not np.all(lam > 0):
                raise ValueError("lam must be a vector of positive local shrinkages")
            object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class HSPosterior:
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class CoefficientMatrix:
    """Sampled codes ``values`` (K x N) and the cut-off used to report sparsity."""

    values: np.ndarray
    effective_zero_threshold: float = 0.0

    @property
    def shape(self):
        return self.values.shape

    def thresholded(self) -> np.ndarray:
        """Copy with sub-threshold entries set to exactly zero."""
        out = self.values.copy()
        out[np.abs(out) <= self.effective_zero_threshold] = 0.0
        return out


def _check_dims(D: np.ndarray, Y: np.ndarray):
    if D.ndim != 2 or Y.ndim != 2:
        raise ValueError(f"D and Y must be 2-D, got D{D.shape} and Y{Y.shape}")
    if D.shape[0] != Y.shape[0]:
        raise ValueError(
            f"dictionary has d={D.shape[0]} rows but data has d={Y.shape[0]} rows"
        )


def ridge_pre_estimate(D, Y, eta: float = 0.01) -> np.ndarray:
    """Solve ``(D^T D + eta I) X = D^T Y`` by Cholesky."""
    D = np.asarray(D, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    _check_dims(D, Y)
    gram = D.T @ D + eta * np.eye(D.shape[1])
    return spd_solve(gram, D.T @ Y, what="ridge Gram D^T D + eta I")


def hs_posterior(D, Y, params: HSParams) -> HSPosterior:
    """Conditional posterior mean and covariance of the codes of ``Y``."""
    D = np.asarray(D, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    _check_dims(D, Y)
    K = D.shape[1]
    if params.lam is None or params.lam.shape != (K,):
        raise ValueError(f"params.lam must hold K={K} local shrinkages")
    lam2 = params.lam ** 2
    tau2 = params.tau ** 2
    DtD = D.T @ D

    x_ridge = ridge_pre_estimate(D, Y, params.eta)
    gram_inv = spd_inverse(DtD + params.eta * np.eye(K), what="jittered Gram D^T D + eta I")
    inner = np.diag(tau2 * lam2) + params.sigma2 * gram_inv
    mean = (tau2 * lam2)[:, None] * spd_solve(inner, x_ridge, what="shrinkage system")

    precision = np.diag(1.0 / (tau2 * lam2)) + DtD / params.sigma2
    covariance = spd_inverse(precision, what="posterior precision")
    return HSPosterior(mean=mean, covariance=covariance)


def sample_coefficients(post: HSPosterior, stream: RandomStream) -> CoefficientMatrix:
    """Draw one column per posterior-mean column: ``mean_j + L z_j`` with ``L L^T = cov``.

    Normals are consumed column by column, K per column.
    """
    mean = np.asarray(post.mean, dtype=np.float64)
    K, N = mean.shape
    cho, _ = spd_factor(post.covariance, JITTER_LADDER, what="posterior covariance")
    L = lower_factor(cho)
    z = stream.standard_normal(K * N).reshape(N, K).T
    X = mean + L @ z
    return CoefficientMatrix(values=X, effective_zero_threshold=SPARSITY_RATIO * float(np.max(np.abs(X), initial=0.0)))


def hs_sparse_code(Y, D, tau: float = 1.0, sigma2: float = 1.0, eta: float = 0.01,
                   stream: RandomStream | None = None) -> CoefficientMatrix:
    """Horseshoe sparse coding of ``Y`` (d x N) against ``D`` (d x K).

    Draws K local shrinkages from the stream, then samples the codes from
    the resulting conditional posterior with the same stream.
    """
    if stream is None:
        raise ValueError("hs_sparse_code needs an explicit RandomStream")
    D = np.asarray(D, dtype=np.float64)
    lam = sample_half_cauchy(stream, HalfCauchyParams(1.0), size=D.shape[1])
    params = HSParams(tau=tau, sigma2=sigma2, eta=eta, lam=lam)
    return sample_coefficients(hs_posterior(D, Y, params), stream)


def effective_sparsity(X: CoefficientMatrix) -> float:
    """Mean over columns of the number of entries above the zero threshold."""
    values = X.values
    if values.size == 0:
        raise ValueError("effective sparsity of an empty matrix is undefined")
    counts = np.count_nonzero(np.abs(values) > X.effective_zero_threshold, axis=0)
    return float(counts.mean())


def init_dictionary(d: int, K: int, stream: RandomStream, mode: str = "gaussian",
                    Y: np.ndarray | None = None) -> np.ndarray:
    """Initial d x K dictionary with unit-norm columns.

    ``"gaussian"`` draws i.i.d. standard normal entries (column-major draw
    order, one column after another).  ``"data_subset"`` picks K distinct
    columns of ``Y`` chosen by a seeded shuffle.
    """
    if mode == "gaussian":
        D = stream.standard_normal(d * K).reshape(K, d).T
    elif mode == "data_subset":
        if Y is None:
            raise ValueError("data_subset initialisation needs the data matrix Y")
        Y = np.asarray(Y, dtype=np.float64)
        if Y.shape[1] < K:
            raise ValueError(f"cannot take K={K} atoms from {Y.shape[1]} samples")
        keys = stream.next_u64(Y.shape[1])
        D = Y[:, np.argsort(keys, kind="stable")[:K]].copy()
    else:
        raise ValueError(f"unknown dictionary initialisation {mode!r}")
    norms = np.sqrt(np.sum(D * D, axis=0))
    if np.any(norms == 0):
        raise ValueError("initial dictionary has a zero column")
    return D / norms
