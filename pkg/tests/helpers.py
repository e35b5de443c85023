"""Synthetic data and scalar oracles shared by the test modules."""

import numpy as np

from rvfldl.rand import RandomStream

#: Global/noise scales deep in the shrinkage regime (tau / sigma = 1e-3).
SPARSE_REGIME = {"tau": 1e-7, "sigma2": 1e-8}


def usps_like(n, seed, side=16):
    """Handwriting-like 16x16 images: two joined Gaussian strokes, peak 255."""
    s = RandomStream(seed)
    yy, xx = np.mgrid[0:side, 0:side]
    out = np.empty((side * side, n))
    ts = np.linspace(0.0, 1.0, 12)
    for j in range(n):
        p = s.uniform(6) * (side - 4) + 2
        img = np.zeros((side, side))
        for (x0, y0), (x1, y1) in (((p[0], p[1]), (p[2], p[3])), ((p[2], p[3]), (p[4], p[5]))):
            for t in ts:
                cx, cy = x0 + t * (x1 - x0), y0 + t * (y1 - y0)
                img += np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / 2.0)
        out[:, j] = 255.0 * img.ravel() / img.max()
    return out


def planted(d, K, N, nnz, seed):
    """``Y = D X`` with unit-norm random atoms and ``nnz`` nonzeros per column."""
    s = RandomStream(seed)
    D = s.standard_normal(d * K).reshape(d, K)
    D /= np.linalg.norm(D, axis=0)
    X = np.zeros((K, N))
    for j in range(N):
        rows = np.argsort(s.next_u64(K))[:nnz]
        X[rows, j] = 1.0 + s.uniform(nnz)
    return D @ X, D, X


def random_spd_problem(rng, d, k, n):
    return rng.standard_normal((d, k)), rng.standard_normal((d, n))


def gd_dictionary(Y, X1, mu1, steps=5000):
    """Plain gradient descent on ||Y - D X1||^2 + mu1 ||D||^2 from D = 0."""
    lr = 1.0 / (2 * (np.linalg.norm(X1, 2) ** 2 + mu1))
    D = np.zeros((Y.shape[0], X1.shape[0]))
    for _ in range(steps):
        D -= lr * (2 * (D @ X1 - Y) @ X1.T + 2 * mu1 * D)
    return D


def fd_gradient(f, X, h=1e-6):
    g = np.zeros_like(X)
    for idx in np.ndindex(*X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        g[idx] = (f(X + E) - f(X - E)) / (2 * h)
    return g
