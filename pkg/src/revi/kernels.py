"""Solvers for the weighted Bregman prox step.

Every kernel solves

    argmin_{x in Q}  <linear, x> + sum_i w_i V(x, x_i)

for the prox function it is built around.  Expanding the divergences, the
objective equals ``W d(x) - <W theta, x>`` up to a constant, with
``W = sum_i w_i`` and ``theta = (sum_i w_i grad d(x_i) - linear) / W``,
so each kernel only has to implement the mirror map ``theta -> argmin d - <theta, .>``
on its set.  Where a closed form in terms of the anchors is more accurate
(fixed points come back bit-exact) the kernel uses it directly.
"""

import numpy as np
from scipy import linalg as sla
from scipy.special import xlogy

from .errors import ConvergenceError, NumericError, UnsupportedGeometryError
from .sets import Box, EuclideanBall, Product, Simplex

__all__ = [
    "EuclideanKernel", "EntropySimplexKernel", "WeightedBoxKernel",
    "BoxSimplexKernel", "QuadraticFormBallKernel", "BoxSimplexInfo",
    "entropy_prox", "weighted_box_prox", "box_simplex_prox", "quadratic_ball_prox",
    "softmax",
]


def _unpack(anchors):
    if len(anchors) == 0:
        raise ValueError("prox step needs at least one anchor")
    weights = np.array([float(w) for w, _ in anchors])
    if np.any(~(weights > 0)):
        raise ValueError("anchor weights must be positive")
    points = np.array([np.asarray(p, dtype=float) for _, p in anchors])
    return weights, points


def softmax(t):
    t = np.asarray(t, dtype=float)
    m = np.max(t)
    if not np.isfinite(m):
        raise NumericError("non-finite exponent in entropy step")
    e = np.exp(t - m)
    s = e.sum()
    if not (s > 0 and np.isfinite(s)):
        raise NumericError("entropy step normalization failed")
    return e / s


class _Kernel:
    name = "kernel"

    def supports(self, Q):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def mirror(self, Q, theta, start=None):
        raise NotImplementedError

    def _check(self, Q):
        if not self.supports(Q):
            raise UnsupportedGeometryError(
                f"{type(self).__name__} does not support {type(Q).__name__}")

    def prox(self, Q, linear, anchors):
        self._check(Q)
        weights, points = _unpack(anchors)
        W = weights.sum()
        grads = np.array([self.grad(p) for p in points])
        theta = (weights @ grads - np.asarray(linear, dtype=float)) / W
        return self.mirror(Q, theta, start=weights @ points / W)


class EuclideanKernel(_Kernel):
    """d = 0.5 ||x||^2 on any set that can project onto itself."""

    name = "euclidean"

    def supports(self, Q):
        return isinstance(Q, (EuclideanBall, Box, Simplex, Product)) and (
            not isinstance(Q, Product) or all(self.supports(b) for b in Q.blocks))

    def grad(self, x):
        return np.asarray(x, dtype=float)

    def mirror(self, Q, theta, start=None):
        self._check(Q)
        return Q.project(theta)

    def prox(self, Q, linear, anchors):
        self._check(Q)
        weights, points = _unpack(anchors)
        W = weights.sum()
        return Q.project(weights @ points / W - np.asarray(linear, dtype=float) / W)


class EntropySimplexKernel(_Kernel):
    """d = scale * sum z_i ln z_i on the probability simplex."""

    name = "entropy_simplex"

    def __init__(self, dim, scale=1.0, floor=1e-300):
        if not scale > 0:
            raise ValueError("entropy scale must be positive")
        self.dim = int(dim)
        self.scale = float(scale)
        self.floor = float(floor)

    def supports(self, Q):
        return isinstance(Q, Simplex) and Q.dim == self.dim

    def grad(self, z):
        return self.scale * (np.log(np.maximum(z, self.floor)) + 1.0)

    def mirror(self, Q, theta, start=None):
        self._check(Q)
        return softmax(np.asarray(theta, dtype=float) / self.scale)

    def prox(self, Q, linear, anchors):
        self._check(Q)
        weights, points = _unpack(anchors)
        W = weights.sum()
        logs = np.log(np.maximum(points, self.floor))
        expo = (weights @ logs) / W - np.asarray(linear, dtype=float) / (self.scale * W)
        return softmax(expo)


class WeightedBoxKernel(_Kernel):
    """d = sum_j weights_j y_j^2 on a box; solved per coordinate."""

    name = "weighted_box"

    def __init__(self, weights):
        weights = np.asarray(weights, dtype=float)
        if np.any(~(weights > 0)):
            raise UnsupportedGeometryError("weighted box kernel needs positive weights")
        self.weights = weights
        self.dim = weights.shape[0]

    def supports(self, Q):
        return isinstance(Q, Box) and Q.dim == self.dim

    def grad(self, y):
        return 2.0 * self.weights * y

    def mirror(self, Q, theta, start=None):
        self._check(Q)
        return np.clip(theta / (2.0 * self.weights), Q.lower, Q.upper)

    def prox(self, Q, linear, anchors):
        self._check(Q)
        weights, points = _unpack(anchors)
        W = weights.sum()
        # stationarity 2 th_j W y_j = 2 th_j sum_i w_i x_ij - linear_j, then clip
        y = weights @ points / W - np.asarray(linear, dtype=float) / (2.0 * self.weights * W)
        return np.clip(y, Q.lower, Q.upper)


class BoxSimplexInfo:
    __slots__ = ("sweeps", "residual_y", "residual_z", "objective")

    def __init__(self, sweeps, residual_y, residual_z, objective):
        self.sweeps = sweeps
        self.residual_y = residual_y
        self.residual_z = residual_z
        self.objective = objective

    def __repr__(self):
        return (f"BoxSimplexInfo(sweeps={self.sweeps}, residual_y={self.residual_y:.3g}, "
                f"residual_z={self.residual_z:.3g})")


class BoxSimplexKernel(_Kernel):
    """Coupled prox function d(y, z) = z^T |A| y^2 + scale * sum z_i ln z_i.

    The joint step is not separable; it is solved by alternating exact block
    minimization (weighted box step in y for fixed z, entropy step in z for
    fixed y) until successive iterates move less than `tol` in the max norm.
    """

    name = "box_simplex"

    def __init__(self, abs_A, inf_norm_A=None, scale=None, max_sweeps=200, tol=1e-10,
                 weight_floor=1e-12, floor=1e-300, check_monotone=True):
        self.abs_A = np.abs(np.asarray(abs_A, dtype=float))
        n, m = self.abs_A.shape
        if n != m:
            raise ValueError("|A| must be square")
        self.n = n
        if inf_norm_A is None:
            inf_norm_A = float(np.max(self.abs_A.sum(axis=1))) if n else 0.0
        self.inf_norm_A = float(inf_norm_A)
        self.scale = float(scale) if scale is not None else 10.0 * self.inf_norm_A
        if not self.scale > 0:
            raise UnsupportedGeometryError("entropy scale must be positive (||A||_inf = 0?)")
        self.max_sweeps = int(max_sweeps)
        self.tol = float(tol)
        self.weight_floor = float(weight_floor)
        self.floor = float(floor)
        self.check_monotone = check_monotone
        self.last_info = None

    def supports(self, Q):
        return (isinstance(Q, Product) and len(Q.blocks) == 2
                and isinstance(Q.blocks[0], Box) and isinstance(Q.blocks[1], Simplex)
                and Q.blocks[0].dim == self.n and Q.blocks[1].dim == self.n)

    def grad(self, x):
        y, z = x[:self.n], x[self.n:]
        gy = 2.0 * y * (self.abs_A.T @ z)
        gz = self.abs_A @ (y * y) + self.scale * (np.log(np.maximum(z, self.floor)) + 1.0)
        return np.concatenate([gy, gz])

    def _objective(self, y, z, theta_y, theta_z):
        return (z @ (self.abs_A @ (y * y)) + self.scale * np.sum(xlogy(z, z))
                - theta_y @ y - theta_z @ z)

    def solve(self, Q, theta, start=None):
        """Return ``(y, z, info)`` minimizing d(y, z) - <theta, (y, z)> over Q."""
        self._check(Q)
        box = Q.blocks[0]
        n = self.n
        theta = np.asarray(theta, dtype=float)
        theta_y, theta_z = theta[:n], theta[n:]
        if start is None:
            z = np.full(n, 1.0 / n)
            y = np.zeros(n)
        else:
            y, z = np.array(start[:n], dtype=float), np.array(start[n:], dtype=float)

        def y_step(z):
            a = self.abs_A.T @ z + self.weight_floor
            return np.clip(theta_y / (2.0 * a), box.lower, box.upper)

        def z_step(y):
            return softmax((theta_z - self.abs_A @ (y * y)) / self.scale)

        history = []
        if self.check_monotone:
            history.append(self._objective(y, z, theta_y, theta_z))
        sweeps = 0
        move = np.inf
        while sweeps < self.max_sweeps:
            sweeps += 1
            y_new = y_step(z)
            if self.check_monotone:
                history.append(self._objective(y_new, z, theta_y, theta_z))
            z_new = z_step(y_new)
            if self.check_monotone:
                history.append(self._objective(y_new, z_new, theta_y, theta_z))
            move = max(np.max(np.abs(y_new - y)), np.max(np.abs(z_new - z)))
            y, z = y_new, z_new
            if move < self.tol:
                break
        res_y = float(np.max(np.abs(y - y_step(z))))
        res_z = float(np.max(np.abs(z - z_step(y))))
        info = BoxSimplexInfo(sweeps, res_y, res_z, history)
        self.last_info = info
        if self.check_monotone:
            h = np.asarray(history)
            slack = 1e-12 * (1.0 + np.abs(h[:-1]))
            if np.any(np.diff(h) > slack):
                raise ConvergenceError("box-simplex sweep objective increased",
                                       residual=float(np.max(np.diff(h))))
        if move >= self.tol and max(res_y, res_z) > 100 * self.tol:
            raise ConvergenceError(
                f"box-simplex prox did not converge in {self.max_sweeps} sweeps",
                residual=max(res_y, res_z))
        return y, z, info

    def mirror(self, Q, theta, start=None):
        y, z, _ = self.solve(Q, theta, start)
        return np.concatenate([y, z])


class QuadraticFormBallKernel(_Kernel):
    """d = 0.5 x^T H x (plus any affine part) on a Euclidean ball.

    Outside the ball the step is found through the dual scalar nu >= 0 of the
    ball constraint, ``(H + nu I)(x - c) = rhs - H c``, by doubling an upper
    bracket and bisecting.
    """

    name = "quadratic_ball"

    def __init__(self, H, dual_tol=1e-12):
        H = np.asarray(H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("H must be square")
        if np.max(np.abs(H - H.T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
            raise UnsupportedGeometryError("H is not symmetric")
        self.H = 0.5 * (H + H.T)
        try:
            self._chol = sla.cho_factor(self.H)
        except np.linalg.LinAlgError as exc:
            raise UnsupportedGeometryError(f"H is not positive definite: {exc}") from exc
        self.eigvals, self.eigvecs = np.linalg.eigh(self.H)
        self.dim = H.shape[0]
        self.dual_tol = float(dual_tol)
        self.last_nu = 0.0

    def supports(self, Q):
        return isinstance(Q, EuclideanBall) and Q.dim == self.dim

    def grad(self, x):
        return self.H @ x

    def _restrict(self, Q, x_unc, rhs):
        """Project the unconstrained stationary point onto the ball constraint."""
        if np.linalg.norm(x_unc - Q.center) <= Q.radius:
            self.last_nu = 0.0
            return x_unc
        p = self.eigvecs.T @ (rhs - self.H @ Q.center)
        lam = self.eigvals

        def norm_at(nu):
            return np.sqrt(np.sum((p / (lam + nu)) ** 2))

        lo, hi = 0.0, 1.0
        while norm_at(hi) > Q.radius:
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                raise NumericError("ball multiplier could not be bracketed")
        while hi - lo > self.dual_tol * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if norm_at(mid) > Q.radius:
                lo = mid
            else:
                hi = mid
        self.last_nu = hi
        return Q.center + self.eigvecs @ (p / (lam + hi))

    def mirror(self, Q, theta, start=None):
        self._check(Q)
        theta = np.asarray(theta, dtype=float)
        return self._restrict(Q, sla.cho_solve(self._chol, theta), theta)

    def prox(self, Q, linear, anchors):
        self._check(Q)
        weights, points = _unpack(anchors)
        W = weights.sum()
        xbar = weights @ points / W
        shift = np.asarray(linear, dtype=float) / W
        x_unc = xbar - sla.cho_solve(self._chol, shift)
        return self._restrict(Q, x_unc, self.H @ xbar - shift)


def entropy_prox(kernel, linear, anchors):
    return kernel.prox(Simplex(kernel.dim), linear, anchors)


def weighted_box_prox(kernel, linear, anchors, box=None):
    return kernel.prox(box if box is not None else Box.cube(kernel.dim), linear, anchors)


def box_simplex_prox(kernel, linear_y, linear_z, anchors, box=None):
    """Joint prox step on ``box x simplex``; returns ``(y, z)``."""
    n = kernel.n
    Q = Product((box if box is not None else Box.cube(n), Simplex(n)))
    x = kernel.prox(Q, np.concatenate([linear_y, linear_z]), anchors)
    return x[:n], x[n:]


def quadratic_ball_prox(kernel, linear, anchors, ball):
    return kernel.prox(ball, linear, anchors)
