"""Bregman geometries: a prox function, its gradient, the divergence it
generates and the kernel that solves prox steps for it.

``d`` and ``divergence`` broadcast over leading axes of their first argument,
which the brute-force oracles rely on.  Divergences are evaluated in forms
that stay accurate when the two points are close (the textbook expression
``d(y) - d(x) - <grad d(x), y - x>`` cancels catastrophically there); the
textbook expression is kept as ``divergence_naive`` for checks.
"""

import numpy as np
from scipy.special import xlogy

from .kernels import (BoxSimplexKernel, EntropySimplexKernel, EuclideanKernel,
                      QuadraticFormBallKernel, WeightedBoxKernel)

__all__ = ["gen_kl", "BregmanGeometry", "EuclideanGeometry", "EntropyGeometry",
           "DiagonalQuadraticGeometry", "BoxSimplexGeometry", "QuadraticGeometry"]


def gen_kl(y, x, floor=1e-300):
    """Generalized KL divergence sum y ln(y / x) - y + x over the last axis.

    Each term equals x phi(u) with u = (y - x) / x and
    phi(u) = (1 + u) ln(1 + u) - u; for |u| < 1e-2 phi is summed from its
    alternating series, which avoids the cancellation that otherwise leaves
    absolute errors of order eps * y when y and x nearly agree.
    """
    y = np.asarray(y, dtype=float)
    x = np.maximum(np.asarray(x, dtype=float), floor)
    u = (y - x) / x
    small = np.abs(u) < 1e-2
    us = np.where(small, u, 0.0)
    series = np.zeros_like(us)
    power = us * us
    for k in range(2, 11):
        series = series + power / (k * (k - 1)) * (1 if k % 2 == 0 else -1)
        power = power * us
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = xlogy(y, y / x) - y + x
    terms = np.where(small, x * series, direct)
    return np.sum(terms, axis=-1)


class BregmanGeometry:
    name = "bregman"
    kernel = None

    def d(self, x):
        raise NotImplementedError

    def grad_d(self, x):
        raise NotImplementedError

    def divergence(self, y, x):
        return self.divergence_naive(y, x)

    def divergence_naive(self, y, x):
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        return self.d(y) - self.d(x) - (y - x) @ self.grad_d(x)

    def prox(self, Q, linear, anchors):
        return self.kernel.prox(Q, linear, anchors)

    def center(self, Q):
        """argmin of d over Q (the canonical starting point)."""
        return self.kernel.mirror(Q, np.zeros(Q.dim))

    def __repr__(self):
        return f"{type(self).__name__}()"


class EuclideanGeometry(BregmanGeometry):
    name = "euclidean"

    def __init__(self):
        self.kernel = EuclideanKernel()

    def d(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.sum(x * x, axis=-1)

    def grad_d(self, x):
        return np.asarray(x, dtype=float).copy()

    def divergence(self, y, x):
        diff = np.asarray(y, dtype=float) - x
        return 0.5 * np.sum(diff * diff, axis=-1)


class EntropyGeometry(BregmanGeometry):
    """Scaled negative entropy on the simplex; V is scale * KL."""

    name = "entropy"

    def __init__(self, dim, scale=1.0, floor=1e-300):
        self.scale = float(scale)
        self.floor = float(floor)
        self.kernel = EntropySimplexKernel(dim, scale, floor)

    def d(self, z):
        return self.scale * np.sum(xlogy(z, z), axis=-1)

    def grad_d(self, z):
        return self.scale * (np.log(np.maximum(z, self.floor)) + 1.0)

    def divergence(self, y, x):
        return self.scale * gen_kl(y, x, self.floor)


class DiagonalQuadraticGeometry(BregmanGeometry):
    """d(y) = sum_j weights_j y_j^2."""

    name = "diagonal_quadratic"

    def __init__(self, weights):
        self.kernel = WeightedBoxKernel(weights)
        self.weights = self.kernel.weights

    def d(self, y):
        y = np.asarray(y, dtype=float)
        return np.sum(self.weights * y * y, axis=-1)

    def grad_d(self, y):
        return 2.0 * self.weights * y

    def divergence(self, y, x):
        diff = np.asarray(y, dtype=float) - x
        return np.sum(self.weights * diff * diff, axis=-1)


class BoxSimplexGeometry(BregmanGeometry):
    """d(y, z) = z^T |A| y^2 + scale * sum_i z_i ln z_i on [-1, 1]^n x simplex."""

    name = "box_simplex"

    def __init__(self, A, scale=None, **kernel_options):
        self.abs_A = np.abs(np.asarray(A, dtype=float))
        self.n = self.abs_A.shape[0]
        self.inf_norm_A = float(np.max(self.abs_A.sum(axis=1)))
        self.kernel = BoxSimplexKernel(self.abs_A, self.inf_norm_A, scale=scale, **kernel_options)
        self.scale = self.kernel.scale
        self.floor = self.kernel.floor

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., :self.n], x[..., self.n:]

    def d(self, x):
        y, z = self._split(x)
        quad = np.sum(z * ((y * y) @ self.abs_A.T), axis=-1)
        return quad + self.scale * np.sum(xlogy(z, z), axis=-1)

    def grad_d(self, x):
        y, z = self._split(x)
        gy = 2.0 * y * (self.abs_A.T @ z)
        gz = self.abs_A @ (y * y) + self.scale * (np.log(np.maximum(z, self.floor)) + 1.0)
        return np.concatenate([gy, gz])

    def divergence(self, u, v):
        y, z = self._split(u)
        yv, zv = self._split(v)
        dy = y - yv
        quad = (np.sum(z * ((dy * dy) @ self.abs_A.T), axis=-1)
                + 2.0 * np.sum((z - zv) * ((yv * dy) @ self.abs_A.T), axis=-1))
        return quad + self.scale * gen_kl(z, zv, self.floor)


class QuadraticGeometry(BregmanGeometry):
    """d(x) = 0.5 x^T H x + <h, x> + c0 with H positive definite."""

    name = "quadratic"

    def __init__(self, H, h=None, c0=0.0, dual_tol=1e-12):
        self.kernel = QuadraticFormBallKernel(H, dual_tol=dual_tol)
        self.H = self.kernel.H
        self.h = np.zeros(self.H.shape[0]) if h is None else np.asarray(h, dtype=float)
        self.c0 = float(c0)

    def d(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.sum((x @ self.H) * x, axis=-1) + x @ self.h + self.c0

    def grad_d(self, x):
        return self.H @ x + self.h

    def divergence(self, y, x):
        diff = np.asarray(y, dtype=float) - x
        return 0.5 * np.sum((diff @ self.H) * diff, axis=-1)

    def center(self, Q):
        return self.kernel.mirror(Q, -self.h)
