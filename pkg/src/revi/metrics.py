"""Quality metrics, brute-force oracles and numerical certification helpers.

The oracles here are deliberately naive (grids, vertex enumeration, central
differences) so they stay independent of the closed forms they check.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .core import SlackReport, prox_objective
from .errors import InfeasibleError, MisuseError, UnsupportedGeometryError
from .sets import Box, EuclideanBall, Product, Simplex

__all__ = ["MetricTrace", "box_simplex_gap", "box_simplex_gap_oracle", "grid_prox_oracle",
           "projected_gradient_prox_oracle", "finite_difference_check", "bregman_to_solution",
           "erm_objective", "certify_relative_smoothness", "certify_function_relative_smoothness",
           "estimate_relative_smoothness"]


@dataclass
class MetricTrace:
    name: str
    iterations: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.iterations = np.asarray(self.iterations, dtype=int)
        self.values = np.asarray(self.values, dtype=float)
        if self.iterations.shape != self.values.shape:
            raise ValueError("iterations and values must have equal length")
        if np.any(np.diff(self.iterations) <= 0):
            raise ValueError("iteration indices must be strictly increasing")

    @property
    def final(self):
        return float(self.values[-1])

    def __len__(self):
        return len(self.values)


# -- box-simplex game -------------------------------------------------------

def _check_box_simplex_point(n, y, z, tol=1e-9):
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape != (n,) or z.shape != (n,):
        raise InfeasibleError("gap needs y, z of the instance dimension")
    if np.any(np.abs(y) > 1 + tol) or np.any(z < -tol) or abs(z.sum() - 1) > tol * n:
        raise InfeasibleError("gap needs y in [-1, 1]^n and z in the simplex")
    return y, z


def box_simplex_gap(instance, y, z):
    """Saddle gap of f(y, z) = z^T A y - <b, z> + <c, y> in closed form.

    Both inner problems are linear: the max over the simplex sits at a vertex
    and the min over the box at y' = -sign(A^T z + c).
    """
    A, b, c = instance.A, instance.b, instance.c
    y, z = _check_box_simplex_point(len(b), y, z)
    gap = (np.max(A @ y - b) + c @ y + np.sum(np.abs(A.T @ z + c)) + b @ z)
    return max(float(gap), 0.0) if gap > -1e-12 else float(gap)


def box_simplex_gap_oracle(instance, y, z, resolution=5):
    """Gap by enumeration: simplex vertices and a box lattice (incl. corners)."""
    A, b, c = instance.A, instance.b, instance.c
    n = len(b)
    y, z = _check_box_simplex_point(n, y, z)
    best_max = max(float(e @ (A @ y) - b @ e + c @ y) for e in np.eye(n))
    axis = np.linspace(-1.0, 1.0, resolution)
    grid = np.array(list(itertools.product(axis, repeat=n)))
    best_min = float(np.min(grid @ (A.T @ z) - b @ z + grid @ c))
    return best_max - best_min


# -- brute-force prox oracle ------------------------------------------------

class _Chart:
    """Parametrization of a low-dimensional feasible set for lattice search.

    Box blocks use their own coordinates, simplex blocks the first n-1
    barycentric coordinates, and ball blocks polar coordinates (radius and
    angles) so that the search can slide along the sphere.
    """

    def __init__(self, Q):
        self.Q = Q
        self.parts = []
        blocks = Q.blocks if isinstance(Q, Product) else (Q,)
        lo, hi, periodic = [], [], []
        for B in blocks:
            if isinstance(B, Box):
                self.parts.append(("box", B.dim, B))
                lo += list(B.lower)
                hi += list(B.upper)
                periodic += [False] * B.dim
            elif isinstance(B, Simplex):
                self.parts.append(("simplex", B.dim - 1, B))
                lo += [0.0] * (B.dim - 1)
                hi += [1.0] * (B.dim - 1)
                periodic += [False] * (B.dim - 1)
            elif isinstance(B, EuclideanBall):
                if B.dim > 3:
                    raise UnsupportedGeometryError("grid oracle supports balls of dim <= 3")
                self.parts.append(("ball", B.dim, B))
                if B.dim == 1:
                    lo += [B.center[0] - B.radius]
                    hi += [B.center[0] + B.radius]
                    periodic += [False]
                else:
                    # radius, (polar angle,) azimuth
                    lo += [0.0] + [0.0] * (B.dim - 1)
                    hi += [B.radius] + ([np.pi] if B.dim == 3 else []) + [2 * np.pi]
                    periodic += [False] * (B.dim - 1) + [True]
            else:
                raise UnsupportedGeometryError(f"no lattice chart for {type(B).__name__}")
        self.lo = np.array(lo)
        self.hi = np.array(hi)
        self.periodic = np.array(periodic, dtype=bool)
        self.dim = len(lo)

    def embed(self, P):
        """Map parameter rows to points; returns (points, feasible mask)."""
        out, j = [], 0
        inside = (P >= self.lo) & (P <= self.hi)
        ok = np.all(inside | self.periodic, axis=1)
        for kind, k, B in self.parts:
            block = P[:, j:j + k]
            if kind == "box":
                out.append(block)
            elif kind == "simplex":
                last = 1.0 - block.sum(axis=1, keepdims=True)
                ok &= last[:, 0] >= 0.0
                out.append(np.hstack([block, np.maximum(last, 0.0)]))
            elif B.dim == 1:
                out.append(block)
            else:
                r, phi = block[:, :1], block[:, -1:]
                if B.dim == 2:
                    u = np.hstack([np.cos(phi), np.sin(phi)])
                else:
                    th = block[:, 1:2]
                    u = np.hstack([np.sin(th) * np.cos(phi), np.sin(th) * np.sin(phi), np.cos(th)])
                out.append(B.center + r * u)
            j += k
        return np.hstack(out), ok


def grid_prox_oracle(geometry, Q, linear, anchors, resolution=200, refine_steps=50):
    """Brute-force minimizer of the prox objective over a feasible lattice.

    The lattice lives in a chart of Q (see ``_Chart``) and the objective is
    evaluated from the textbook divergence, independently of the stable forms
    the kernels and geometries use.  The best lattice point is refined by a
    local pattern search whose window halves each time the incumbent stays
    interior to it, ``refine_steps`` halvings in total.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    chart = _Chart(Q)
    if chart.dim > 3:
        raise UnsupportedGeometryError("grid oracle supports at most 3 free parameters")
    if chart.dim == 0:
        return chart.embed(np.zeros((1, 0)))[0][0]

    def best_of(P):
        X, ok = chart.embed(P)
        if not np.any(ok):
            return None, None, np.inf
        P, X = P[ok], X[ok]
        vals = prox_objective(geometry, linear, anchors, X, naive=True)
        vals = np.where(np.isfinite(vals), vals, np.inf)
        i = int(np.argmin(vals))
        return P[i], X[i], vals[i]

    axes = [np.linspace(a, b, resolution) for a, b in zip(chart.lo, chart.hi)]
    P = np.array(np.meshgrid(*axes, indexing="ij")).reshape(chart.dim, -1).T
    p, x, fx = best_of(P)
    if p is None:
        raise UnsupportedGeometryError("lattice missed the feasible set")
    h = (chart.hi - chart.lo) / (resolution - 1)
    offsets = np.array(list(itertools.product(range(-5, 6), repeat=chart.dim)), dtype=float)
    halvings = 0
    while halvings < refine_steps:
        q, xq, fq = best_of(p + offsets * h)
        if fq < fx:
            moved_to_edge = np.any(np.abs(q - p) >= 5 * h * (1 - 1e-9))
            p, x, fx = q, xq, fq
            if moved_to_edge:
                continue
        h = h / 2.0
        halvings += 1
    return x


def projected_gradient_prox_oracle(H, ball, linear, anchors, max_iter=200000, tol=1e-15):
    """Prox step of d = 0.5 x^T H x (+ affine terms) on a ball by projected gradient.

    The objective's gradient is ``linear + H (W z - sum_i w_i x_i)``; steps of
    length 1 / (W lambda_max(H)) are taken until the iterate stalls.
    """
    H = np.asarray(H, dtype=float)
    W = float(sum(w for w, _ in anchors))
    pull = sum(w * np.asarray(x, dtype=float) for w, x in anchors)
    step = 1.0 / (W * np.max(np.linalg.eigvalsh(H)))
    z = ball.project(pull / W)
    for _ in range(max_iter):
        z_new = ball.project(z - step * (linear + H @ (W * z - pull)))
        if np.max(np.abs(z_new - z)) <= tol:
            return z_new
        z = z_new
    return z


# -- smooth-function checks -------------------------------------------------

def finite_difference_check(scalar_fn, grad_fn, points, h=1e-6):
    """Max relative error of ``grad_fn`` against central differences.

    The denominator is ``max(1, |grad component|)``.
    """
    worst = 0.0
    for x in np.atleast_2d(np.asarray(points, dtype=float)):
        g = np.asarray(grad_fn(x), dtype=float)
        for i in range(x.shape[0]):
            e = np.zeros_like(x)
            e[i] = h
            fd = (scalar_fn(x + e) - scalar_fn(x - e)) / (2 * h)
            worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
    return worst


def bregman_to_solution(problem, iterate):
    """V(z*, iterate) under the problem's geometry."""
    if problem.known_solution is None:
        raise MisuseError("problem has no known solution")
    v = float(problem.geometry.divergence(problem.known_solution, np.asarray(iterate, float)))
    return 0.0 if -1e-12 < v < 0 else v


def erm_objective(instance, x):
    """F(x) = (1/m) sum_j f_j(x); for reporting only, solvers never read it."""
    x = np.asarray(x, dtype=float)
    r = np.einsum("jsn,n->js", instance.A, x) - instance.b
    s = instance.A.shape[1]
    return float(np.mean(np.sum(r * r, axis=1)) / (2 * s) + instance.lam * (x @ x))


# -- relative smoothness samplers ---------------------------------------------

def _triples(problem, samples, rng, local_scale):
    Q = problem.Q
    X, Y, Z = (Q.sample(rng, samples) for _ in range(3))
    if local_scale:
        # pull half the triples together: small steps are where adaptive L matters
        half = samples // 2
        t = local_scale * rng.random((half, 1))
        Y[:half] = Z[:half] + t * (Y[:half] - Z[:half])
        X[:half] = Z[:half] + t * (X[:half] - Z[:half])
    return X, Y, Z


def certify_relative_smoothness(problem, L, samples=1000, rng_seed=0, local_scale=0.0):
    """Worst slack of L V(x, z) + L V(z, y) - <g(y) - g(z), x - z> over sampled triples."""
    rng = np.random.default_rng(rng_seed)
    geom = problem.geometry
    worst, wit = np.inf, None
    for x, y, z in zip(*_triples(problem, samples, rng, local_scale)):
        slack = (L * (geom.divergence(x, z) + geom.divergence(z, y))
                 - (problem.g(y) - problem.g(z)) @ (x - z))
        if slack < worst:
            worst, wit = float(slack), (x, y, z)
    rep = SlackReport(worst, None, samples)
    if not rep.passed:
        rep.witnesses = wit
    return rep


def estimate_relative_smoothness(problem, samples=1000, rng_seed=0, local_scale=1e-3):
    """Largest observed ratio <g(y) - g(z), x - z> / (V(x, z) + V(z, y)) on sampled triples."""
    rng = np.random.default_rng(rng_seed)
    geom = problem.geometry
    best = 0.0
    for x, y, z in zip(*_triples(problem, samples, rng, local_scale)):
        den = geom.divergence(x, z) + geom.divergence(z, y)
        if den > 1e-300:
            best = max(best, float((problem.g(y) - problem.g(z)) @ (x - z)) / den)
    return best


def certify_function_relative_smoothness(F, grad_F, geometry, Q, L=1.0, samples=1000,
                                         rng_seed=0):
    """Worst slack of F(x) + <grad F(x), y - x> + L V(y, x) - F(y) over sampled pairs."""
    rng = np.random.default_rng(rng_seed)
    X, Y = Q.sample(rng, samples), Q.sample(rng, samples)
    worst, wit = np.inf, None
    for x, y in zip(X, Y):
        slack = F(x) + grad_F(x) @ (y - x) + L * geometry.divergence(y, x) - F(y)
        if slack < worst:
            worst, wit = float(slack), (x, y)
    rep = SlackReport(worst, None, samples)
    if not rep.passed:
        rep.witnesses = wit
    return rep
