"""End-to-end steps shared by the command-line tool, the demos and the tests.

Every function takes *raw* data (pixel units for images) and applies the
model's own preprocessing, so callers never have to remember which
normalisation a model was trained with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import SVCModel, svc_decision, svc_train
from .enhance import enhance
from .horseshoe import SPARSITY_RATIO, effective_sparsity
from .metrics import ImageBuffer, relative_reconstruction_error, ssim
from .solver import RidgeParams, code_query
from .training import TrainedModel, prepare_data, query_codes, restore_scale, sparse_codes, training_codes

__all__ = [
    "SparsityReport",
    "column_sparsity",
    "fit_svc",
    "predict",
    "reconstruct_raw",
    "reconstruction_error",
    "sparsity_report",
    "ssim_per_image",
    "training_fit_error",
]


def _check_dim(model: TrainedModel, Y: np.ndarray, what: str):
    if Y.ndim != 2 or Y.shape[0] != model.d:
        raise ValueError(f"{what} has d={Y.shape[0] if Y.ndim else 0}, model expects d={model.d}")


def fit_svc(model: TrainedModel, Y, labels, degree: int = 2, reg_C: float = 1.0, tol: float = 1e-3,
            max_iter: int = 1_000_000) -> SVCModel:
    """Train the one-vs-rest SVC on label-informed codes of the training data."""
    Y = np.asarray(Y, dtype=np.float64)
    _check_dim(model, Y, "training data")
    codes = training_codes(model, prepare_data(Y, model.config), labels)
    return svc_train(codes, labels, degree=degree, reg_C=reg_C, tol=tol, max_iter=max_iter)


def predict(model: TrainedModel, Yq, svc: SVCModel | None = None):
    """Labels and per-class scores (c x M) for raw queries.

    With ``svc`` the SVC decision values are used, otherwise ``W x``.
    """
    Yq = np.asarray(Yq, dtype=np.float64)
    _check_dim(model, Yq, "query data")
    codes = query_codes(model, prepare_data(Yq, model.config, keep_zero=True))
    if svc is not None:
        scores = svc_decision(svc, codes)
        return svc.class_ids[np.argmax(scores, axis=0)], scores
    if model.classifier is None:
        raise ValueError("an unsupervised model has no classifier; supply an SVC")
    scores = model.classifier @ codes
    return np.argmax(scores, axis=0), scores


def _recon_codes(model: TrainedModel, Yp: np.ndarray) -> np.ndarray:
    cfg = model.config
    return code_query(Yp, model.dictionary, None, RidgeParams(cfg.mu1, cfg.mu2, 0.0, cfg.eta))


def reconstruct_raw(model: TrainedModel, Yq) -> np.ndarray:
    """Reconstructions ``D1 x`` of raw queries, mapped back to raw units."""
    Yq = np.asarray(Yq, dtype=np.float64)
    _check_dim(model, Yq, "query data")
    Yp = prepare_data(Yq, model.config, keep_zero=True)
    return restore_scale(model.dictionary @ _recon_codes(model, Yp), Yq, model.config)


def reconstruction_error(model: TrainedModel, Y) -> float:
    """Relative error of recoding prepared ``Y`` against the learned dictionary."""
    Y = np.asarray(Y, dtype=np.float64)
    _check_dim(model, Y, "data")
    Yp = prepare_data(Y, model.config, keep_zero=True)
    return relative_reconstruction_error(Yp, model.dictionary, _recon_codes(model, Yp))


def training_fit_error(model: TrainedModel, Y) -> float:
    """Relative error ``||Y - D1 X1|| / ||Y||`` of the learned fit on its training data.

    ``X1`` is the enhanced Horseshoe code of the prepared ``Y`` under the
    model's seed and stored enhancement map, i.e. the data term that training
    minimises, evaluated at the averaged dictionary.
    """
    Y = np.asarray(Y, dtype=np.float64)
    _check_dim(model, Y, "data")
    Yp = prepare_data(Y, model.config)
    X1 = enhance(sparse_codes(Yp, model.config), model.enhancement)
    return relative_reconstruction_error(Yp, model.dictionary, X1)


def ssim_per_image(Y, Yhat, image_shape, dynamic_range: float = 255.0, windowed: bool = False) -> np.ndarray:
    """SSIM of each column pair, reshaped row-major to ``image_shape``."""
    Y = np.asarray(Y, dtype=np.float64)
    Yhat = np.asarray(Yhat, dtype=np.float64)
    if Y.shape != Yhat.shape:
        raise ValueError(f"originals {Y.shape} and reconstructions {Yhat.shape} differ in shape")
    h, w = image_shape
    if h * w != Y.shape[0]:
        raise ValueError(f"image shape {h}x{w} does not match d={Y.shape[0]}")
    out = np.empty(Y.shape[1])
    for j in range(Y.shape[1]):
        a = ImageBuffer(Y[:, j].reshape(h, w), dynamic_range)
        b = ImageBuffer(Yhat[:, j].reshape(h, w), dynamic_range)
        out[j] = ssim(a, b, windowed=windowed)
    return out


def column_sparsity(M, ratio: float = SPARSITY_RATIO) -> float:
    """Mean count of entries above ``ratio`` times their own column's max |entry|."""
    A = np.abs(np.asarray(getattr(M, "values", M), dtype=np.float64))
    thr = ratio * A.max(axis=0, keepdims=True)
    return float(np.mean(np.sum(A > thr, axis=0)))


@dataclass(frozen=True)
class SparsityReport:
    without_enhancement: float
    with_enhancement: float

    @property
    def ratio(self) -> float:
        if self.without_enhancement == 0:
            return float("inf")
        return self.with_enhancement / self.without_enhancement


def sparsity_report(model: TrainedModel, Y) -> SparsityReport:
    """Effective sparsity of the Horseshoe codes of ``Y`` before and after enhancement.

    The base codes use the global cut-off ``1e-3 max|X|``; the enhanced
    ``[X; sigmoid(W X + b)]`` columns use ``1e-3`` of each column's max.
    """
    Y = np.asarray(Y, dtype=np.float64)
    _check_dim(model, Y, "data")
    X = sparse_codes(prepare_data(Y, model.config), model.config)
    X1 = enhance(X, model.enhancement)
    return SparsityReport(effective_sparsity(X), column_sparsity(X1))
