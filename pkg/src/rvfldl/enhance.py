"""Random functional-link enhancement of sparse codes.

``X1 = [X; sigmoid(W X + b 1^T)]`` with ``W`` (L x K) and ``b`` (L,) drawn once
from a seeded stream and never trained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rand import RandomStream

__all__ = ["ACTIVATIONS", "EnhancedMatrix", "EnhancementMap", "enhance", "init_enhancement", "sigmoid"]


_OPEN_LO = np.nextafter(0.0, 1.0)  # smallest positive subnormal
_OPEN_HI = np.nextafter(1.0, 0.0)  # 1 - 2**-53


def sigmoid(t):
    """Logistic function ``1 / (1 + exp(-t))`` on the open interval (0, 1).

    Evaluated without overflow for any finite input.  In float64 the exact
    value rounds to 1.0 once t exceeds about 36.7 (and to 0.0 below about
    -745); such results are held one ulp inside the interval instead, which
    is within rounding error of the exact value.
    """
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    pos = t >= 0
    with np.errstate(under="ignore"):
        out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
        e = np.exp(t[~pos])
        out[~pos] = e / (1.0 + e)
    return np.clip(out, _OPEN_LO, _OPEN_HI)


ACTIVATIONS = {"sigmoid": sigmoid}


@dataclass(frozen=True)
class EnhancementMap:
    weights: np.ndarray
    biases: np.ndarray
    activation: str = "sigmoid"

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        b = np.array(self.biases, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ValueError(f"weights {w.shape} and biases {b.shape} disagree on L")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        w.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def K(self) -> int:
        return self.weights.shape[1]

    @property
    def L(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class EnhancedMatrix:
    values: np.ndarray
    base_rows: int

    @property
    def enhanced_rows(self) -> int:
        return self.values.shape[0] - self.base_rows

    @property
    def base(self) -> np.ndarray:
        return self.values[: self.base_rows]

    @property
    def enhanced(self) -> np.ndarray:
        return self.values[self.base_rows:]


def init_enhancement(K: int, L: int, stream: RandomStream, activation: str = "sigmoid") -> EnhancementMap:
    """Draw weights (row-major, L*K normals) then biases (L normals)."""
    if K < 1 or L < 1:
        raise ValueError(f"K and L must be at least 1, got K={K}, L={L}")
    weights = stream.standard_normal(L * K).reshape(L, K)
    biases = stream.standard_normal(L)
    return EnhancementMap(weights, biases, activation)


def enhance(X, emap: EnhancementMap) -> EnhancedMatrix:
    """Stack the codes on top of their random nonlinear transform."""
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != emap.K:
        raise ValueError(f"codes have {X.shape[0] if X.ndim else 0} rows, map expects K={emap.K}")
    act = ACTIVATIONS[emap.activation]
    hidden = act(emap.weights @ X + emap.biases[:, None])
    return EnhancedMatrix(np.vstack([X, hidden]), base_rows=X.shape[0])
