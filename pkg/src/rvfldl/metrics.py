"""Evaluation metrics: accuracy, relative reconstruction error and SSIM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["ImageBuffer", "accuracy", "relative_reconstruction_error", "ssim"]

SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_WINDOW = 8


@dataclass(frozen=True)
class ImageBuffer:
    """Greyscale image whose pixels are clamped to ``[0, dynamic_range]``."""

    pixels: np.ndarray
    dynamic_range: float = 255.0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or min(px.shape) < 1:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {px.shape}")
        if not self.dynamic_range > 0:
            raise ValueError("dynamic_range must be positive")
        object.__setattr__(self, "pixels", np.clip(px, 0.0, self.dynamic_range))

    @property
    def shape(self):
        return self.pixels.shape


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError(f"{predicted.shape[0]} predictions for {truth.shape[0]} labels")
    if predicted.size == 0:
        raise ValueError("accuracy of an empty prediction set is undefined")
    return float(np.mean(predicted == truth))


def relative_reconstruction_error(Y, D1, X1) -> float:
    """``||Y - D1 X1||_F / ||Y||_F``."""
    Y = np.asarray(Y, dtype=np.float64)
    D1 = np.asarray(getattr(D1, "values", D1), dtype=np.float64)
    X1 = np.asarray(getattr(X1, "values", X1), dtype=np.float64)
    ny = np.linalg.norm(Y)
    if ny == 0:
        raise ValueError("relative error is undefined for an all-zero Y")
    return float(np.linalg.norm(Y - D1 @ X1) / ny)


def _ssim_from_moments(mu_a, mu_b, var_a, var_b, cov, R):
    c1 = (SSIM_K1 * R) ** 2
    c2 = (SSIM_K2 * R) ** 2
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return num / den


def ssim(a, b, windowed: bool = False, dynamic_range: float | None = None) -> float:
    """Structural similarity of two images.

    Global mode uses whole-image means, (population) variances and
    covariance.  Windowed mode averages the same formula over every 8x8
    window at stride 1.  Plain arrays are wrapped with ``dynamic_range``
    (default 255).
    """
    if not isinstance(a, ImageBuffer):
        a = ImageBuffer(a, 255.0 if dynamic_range is None else dynamic_range)
    if not isinstance(b, ImageBuffer):
        b = ImageBuffer(b, 255.0 if dynamic_range is None else dynamic_range)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.dynamic_range != b.dynamic_range:
        raise ValueError("images must share a dynamic range")
    R = a.dynamic_range
    x, y = a.pixels, b.pixels
    if not windowed:
        mu_x, mu_y = x.mean(), y.mean()
        dx, dy = x - mu_x, y - mu_y
        return float(_ssim_from_moments(mu_x, mu_y, np.mean(dx * dx), np.mean(dy * dy), np.mean(dx * dy), R))
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(f"windowed SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    wx = sliding_window_view(x, (SSIM_WINDOW, SSIM_WINDOW))
    wy = sliding_window_view(y, (SSIM_WINDOW, SSIM_WINDOW))
    mu_x = wx.mean(axis=(-2, -1))
    mu_y = wy.mean(axis=(-2, -1))
    dx = wx - mu_x[..., None, None]
    dy = wy - mu_y[..., None, None]
    var_x = np.mean(dx * dx, axis=(-2, -1))
    var_y = np.mean(dy * dy, axis=(-2, -1))
    cov = np.mean(dx * dy, axis=(-2, -1))
    return float(np.mean(_ssim_from_moments(mu_x, mu_y, var_x, var_y, cov, R)))
