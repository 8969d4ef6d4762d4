"""Variational inequality problems and the generic prox step.

A problem bundles an operator oracle ``g``, a feasible set, a Bregman
geometry and the relative strong-monotonicity constant ``mu``:

    mu V(y, x) + mu V(x, y) <= <g(y) - g(x), y - x>    for all x, y in Q.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .errors import DimensionError, InfeasibleError, NumericError
from .geometry import BregmanGeometry
from .sets import FEAS_TOL, FeasibleSet, as_vector

__all__ = ["VIProblem", "divergence", "prox_step", "prox_objective",
           "prox_optimality_residual", "SlackReport",
           "certify_relative_strong_monotonicity", "PROX_RESIDUAL_TOL"]

PROX_RESIDUAL_TOL = 1e-8


@dataclass(eq=False)
class VIProblem:
    """A variational inequality over ``Q`` with operator ``operator``.

    ``oracle_counter`` counts operator evaluations made through :meth:`g`.
    ``linear_part`` optionally holds the matrix of the affine part of the
    operator (used for Euclidean Lipschitz estimates).  ``notes`` collects
    runtime adjustments (clamps, overrides) worth recording in a manifest.
    """

    operator: Callable[[np.ndarray], np.ndarray]
    Q: FeasibleSet
    geometry: BregmanGeometry
    mu: float
    known_solution: Optional[np.ndarray] = None
    gradient_field: bool = False
    linear_part: Optional[np.ndarray] = None
    relative_smoothness: Optional[float] = None
    name: str = "vi"
    notes: dict = field(default_factory=dict)
    instance: Any = None
    oracle_counter: int = 0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.relative_smoothness is not None and not self.relative_smoothness > 0:
            raise ValueError("relative_smoothness must be positive")
        if self.known_solution is not None:
            self.known_solution = as_vector(self.known_solution, self.Q.dim, "known_solution")
            if not self.Q.contains(self.known_solution, 1e-9):
                raise InfeasibleError("known_solution is not feasible")

    @property
    def dim(self):
        return self.Q.dim

    def g(self, x):
        self.oracle_counter += 1
        out = np.asarray(self.operator(x), dtype=float)
        if out.shape != (self.dim,):
            raise DimensionError(f"operator returned shape {out.shape}, expected ({self.dim},)")
        if not np.all(np.isfinite(out)):
            raise NumericError("operator returned non-finite values")
        return out


def divergence(geometry, y, x):
    """Bregman divergence V(y, x) with roundoff negatives clamped to zero."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != x.shape:
        raise DimensionError(f"dimension mismatch: {y.shape} vs {x.shape}")
    v = float(geometry.divergence(y, x))
    if not np.isfinite(v):
        if not np.all(np.isfinite(y)):
            culprit = f"y={y!r}"
        elif not np.all(np.isfinite(x)):
            culprit = f"x={x!r}"
        else:
            culprit = f"d undefined at y={y!r} or x={x!r}"
        raise NumericError(f"divergence is not finite ({culprit})")
    if -1e-12 < v < 0.0:
        return 0.0
    return v


def prox_step(geometry, Q, linear, anchors):
    """argmin_{z in Q} <linear, z> + sum_i w_i V(z, x_i) for ``anchors = [(w_i, x_i)]``."""
    linear = as_vector(linear, Q.dim, "linear")
    z = geometry.prox(Q, linear, anchors)
    if not np.all(np.isfinite(z)):
        raise NumericError("prox step produced non-finite values")
    return z


def prox_objective(geometry, linear, anchors, z, naive=False):
    """Objective of the prox step, vectorized over leading axes of ``z``.

    ``naive=True`` evaluates divergences from their definition instead of the
    geometry's stable form.
    """
    z = np.asarray(z, dtype=float)
    div = geometry.divergence_naive if naive else geometry.divergence
    val = z @ np.asarray(linear, dtype=float)
    for w, x in anchors:
        val = val + w * div(z, np.asarray(x, dtype=float))
    return val


def prox_optimality_residual(geometry, Q, linear, anchors, z, samples=100, rng=None):
    """Smallest ``<linear + sum w_i (grad d(z) - grad d(x_i)), u - z>`` over sampled ``u``.

    Nonnegative (up to roundoff) exactly when ``z`` satisfies first-order
    optimality of the prox step against the sampled directions.
    """
    rng = np.random.default_rng(rng)
    gz = geometry.grad_d(z)
    direction = np.asarray(linear, dtype=float).copy()
    for w, x in anchors:
        direction += w * (gz - geometry.grad_d(np.asarray(x, dtype=float)))
    u = Q.sample(rng, samples)
    return float(np.min((u - z) @ direction))


@dataclass
class SlackReport:
    min_slack: float
    witnesses: Optional[tuple]
    samples: int
    tol: float = 1e-8

    @property
    def passed(self):
        return self.min_slack >= -self.tol


def certify_relative_strong_monotonicity(problem, samples=1000, rng_seed=0):
    """Sample feasible pairs and report the worst slack of the monotonicity inequality.

    slack = <g(y) - g(x), y - x> - mu (V(y, x) + V(x, y)); a violating pair is
    returned in ``witnesses`` when the minimum slack is below -1e-8.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    X = problem.Q.sample(rng, samples)
    Y = problem.Q.sample(rng, samples)
    geom = problem.geometry
    worst, pair = np.inf, None
    for x, y in zip(X, Y):
        slack = ((problem.g(y) - problem.g(x)) @ (y - x)
                 - problem.mu * (geom.divergence(y, x) + geom.divergence(x, y)))
        if slack < worst:
            worst, pair = float(slack), (x, y)
    report = SlackReport(worst, None, samples)
    if not report.passed:
        report.witnesses = pair
    return report


def check_feasible(Q, x, name="x", tol=FEAS_TOL):
    x = as_vector(x, Q.dim, name)
    if not Q.contains(x, tol):
        raise InfeasibleError(f"{name} is not in the feasible set")
    return x
