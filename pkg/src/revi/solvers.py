"""Extragradient-type solvers and their convergence bounds.

The adaptive method takes two prox steps per trial,

    w_k     = argmin_{y in Q} <g(z_k) / L, y> + V(y, z_k)
    z_{k+1} = argmin_{z in Q} <g(w_k) / L, z> + V(z, z_k) + (mu / L) V(z, w_k)

starting each iteration from L = L_k / 2 and doubling L until

    <g(z_k) - g(w_k), z_{k+1} - w_k> <= L (V(w_k, z_k) + V(z_{k+1}, w_k)) + slack(L)

holds; the accepted value becomes L_{k+1}.  ``slack`` is 0 for the plain
method, ``delta`` for the additive variant and ``L * delta`` for the
multiplicative one.  g(z_k) is evaluated once per iteration and reused by
every trial, g(w_k) once per trial.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import check_feasible, prox_step
from .errors import LineSearchError, MisuseError
from .linalg import operator_norm
from .metrics import MetricTrace, bregman_to_solution, estimate_relative_smoothness

__all__ = ["AdaptiveConfig", "DeltaConfig", "SolverRun", "solve_adaptive",
           "solve_delta_additive", "solve_delta_multiplicative", "solve_nonadaptive_eg",
           "solve_classical_eg", "solve_mirror_descent", "trial_budget_check",
           "trial_budget_slack", "theoretical_bound", "uniform_bound", "default_ceg_step",
           "SOLVERS"]


@dataclass
class AdaptiveConfig:
    L0: float
    mu: float
    max_iters: int
    max_trials_per_iter: int = 60
    stop_tol: Optional[float] = None

    def __post_init__(self):
        if not self.L0 > 0:
            raise ValueError("L0 must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.max_trials_per_iter < 1:
            raise ValueError("max_trials_per_iter must be >= 1")


@dataclass
class DeltaConfig(AdaptiveConfig):
    delta: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not self.delta >= 0:
            raise ValueError("delta must be nonnegative")


@dataclass
class SolverRun:
    """Per-iteration trace of a solver run.

    Index k of ``oracle_calls``, ``wall_ms`` and every metric trace refers to
    iterate z_k (k = 0 is the starting point).  ``L[k]`` and ``trials[k]``
    belong to the iteration that produced z_{k+1}.
    """

    solver: str
    L0: float
    z: list = field(default_factory=list)
    z_index: list = field(default_factory=list)
    w: list = field(default_factory=list)
    L: list = field(default_factory=list)
    trials: list = field(default_factory=list)
    oracle_calls: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    final: Optional[np.ndarray] = None
    status: str = "ok"

    @property
    def n_iters(self):
        return len(self.L)

    @property
    def total_trials(self):
        return int(np.sum(self.trials))

    def metric(self, name):
        return self.metrics[name]


class _Recorder:
    def __init__(self, problem, solver, L0, metrics, keep):
        self.problem = problem
        self.run = SolverRun(solver=solver, L0=float(L0))
        fns = dict(metrics or {})
        if problem.known_solution is not None:
            fns.setdefault("bregman_to_solution", lambda x: bregman_to_solution(problem, x))
        self.fns = fns
        self.values = {name: [] for name in fns}
        self.keep = keep
        self.calls0 = problem.oracle_counter
        self.t0 = time.perf_counter()

    def _keep(self, k):
        if self.keep is True:
            return True
        if self.keep is False or self.keep is None:
            return k == 0
        return k % int(self.keep) == 0

    def record(self, k, z, w=None, L=None, trials=None):
        run = self.run
        if L is not None:
            run.L.append(float(L))
            run.trials.append(int(trials))
        if w is not None and self._keep(k - 1):
            run.w.append(w)
        if self._keep(k):
            run.z.append(z)
            run.z_index.append(k)
        run.final = z
        run.oracle_calls.append(self.problem.oracle_counter - self.calls0)
        run.wall_ms.append(1e3 * (time.perf_counter() - self.t0))
        for name, fn in self.fns.items():
            self.values[name].append(float(fn(z)))

    def finish(self, status="ok"):
        run = self.run
        if run.z_index[-1] != len(run.L):
            run.z.append(run.final)
            run.z_index.append(len(run.L))
        iters = np.arange(len(run.L) + 1)
        run.metrics = {name: MetricTrace(name, iters, vals) for name, vals in self.values.items()}
        run.L = np.asarray(run.L, dtype=float)
        run.trials = np.asarray(run.trials, dtype=int)
        run.oracle_calls = np.asarray(run.oracle_calls, dtype=int)
        run.wall_ms = np.asarray(run.wall_ms, dtype=float)
        run.status = status
        return run


def _adaptive(problem, cfg, z0, slack, solver, metrics, keep_iterates):
    geom, Q, mu = problem.geometry, problem.Q, cfg.mu
    z = check_feasible(Q, z0, "z0", tol=1e-9)
    rec = _Recorder(problem, solver, cfg.L0, metrics, keep_iterates)
    rec.record(0, z)
    L_k = cfg.L0
    for k in range(cfg.max_iters):
        gz = problem.g(z)
        L = 0.5 * L_k
        for trial in range(1, cfg.max_trials_per_iter + 1):
            w = prox_step(geom, Q, gz / L, [(1.0, z)])
            gw = problem.g(w)
            z_next = prox_step(geom, Q, gw / L, [(1.0, z), (mu / L, w)])
            lhs = (gz - gw) @ (z_next - w)
            rhs = L * (geom.divergence(w, z) + geom.divergence(z_next, w)) + slack(L)
            if lhs <= rhs:
                break
            if trial < cfg.max_trials_per_iter:
                L *= 2.0
        else:
            run = rec.finish(status="line_search_failed")
            raise LineSearchError(
                f"{solver}: no acceptable L after {cfg.max_trials_per_iter} trials "
                f"at iteration {k} (last L={L:.6g}, residual={lhs - rhs:.3g})",
                last_L=L, residual=float(lhs - rhs), run=run)
        L_k = L
        moved = geom.divergence(z_next, z)
        rec.record(k + 1, z_next, w=w, L=L, trials=trial)
        z = z_next
        if cfg.stop_tol is not None and moved < cfg.stop_tol:
            break
    return rec.finish()


def solve_adaptive(problem, cfg, z0, metrics=None, keep_iterates=True):
    """Adaptive proximal extragradient method (no slack in the step test)."""
    return _adaptive(problem, cfg, z0, lambda L: 0.0, "alg1", metrics, keep_iterates)


def solve_delta_additive(problem, cfg, z0, metrics=None, keep_iterates=True):
    """Adaptive method whose step test tolerates an additive slack ``delta``."""
    delta = float(cfg.delta)
    return _adaptive(problem, cfg, z0, lambda L: delta, "alg2", metrics, keep_iterates)


def solve_delta_multiplicative(problem, cfg, z0, metrics=None, keep_iterates=True):
    """Adaptive method whose step test tolerates a slack ``L * delta``."""
    delta = float(cfg.delta)
    return _adaptive(problem, cfg, z0, lambda L: L * delta, "alg3", metrics, keep_iterates)


def solve_nonadaptive_eg(problem, L=None, mu=None, max_iters=100, z0=None, metrics=None,
                         keep_iterates=True):
    """The same two prox steps with a constant L and no step test.

    Without ``L`` the problem's known relative smoothness constant is used;
    failing that, the constant is estimated by sampling the relative
    smoothness ratio of the operator (see ``estimate_relative_smoothness``).
    """
    geom, Q = problem.geometry, problem.Q
    mu = problem.mu if mu is None else mu
    if L is None and problem.relative_smoothness is not None:
        L = problem.relative_smoothness
    elif L is None:
        L = estimate_relative_smoothness(problem)
        problem.notes["nonadaptive_L_estimate"] = L
    z = check_feasible(Q, geom.center(Q) if z0 is None else z0, "z0", tol=1e-9)
    rec = _Recorder(problem, "nonadaptive_eg", L, metrics, keep_iterates)
    rec.record(0, z)
    for k in range(max_iters):
        w = prox_step(geom, Q, problem.g(z) / L, [(1.0, z)])
        z = prox_step(geom, Q, problem.g(w) / L, [(1.0, z), (mu / L, w)])
        rec.record(k + 1, z, w=w, L=L, trials=1)
    return rec.finish()


def default_ceg_step(problem):
    """1 / (Euclidean norm of the operator's affine part), by power iteration."""
    if problem.linear_part is None:
        raise MisuseError("classical extragradient needs an explicit step for this problem")
    return 1.0 / operator_norm(problem.linear_part)


def solve_classical_eg(problem, step=None, max_iters=100, z0=None, metrics=None,
                       keep_iterates=True):
    """Euclidean extragradient, regardless of the problem's own geometry.

    w_k = P_Q(z_k - step g(z_k)),  z_{k+1} = P_Q(z_k - step g(w_k)).
    """
    Q = problem.Q
    if step is None:
        step = default_ceg_step(problem)
        problem.notes["classical_eg_step"] = step
    if not step > 0:
        raise ValueError("step must be positive")
    z = check_feasible(Q, Q.project(np.zeros(Q.dim)) if z0 is None else z0, "z0", tol=1e-9)
    rec = _Recorder(problem, "classical_eg", 1.0 / step, metrics, keep_iterates)
    rec.record(0, z)
    for k in range(max_iters):
        w = Q.project(z - step * problem.g(z))
        z = Q.project(z - step * problem.g(w))
        rec.record(k + 1, z, w=w, L=1.0 / step, trials=1)
    return rec.finish()


def solve_mirror_descent(problem, max_iters=100, z0=None, metrics=None, keep_iterates=True):
    """x_{k+1} = argmin_{x in Q} <grad F(x_k), x> + V(x, x_k), unit step.

    Only meaningful for gradient fields (relative 1-smoothness makes the unit
    step valid).
    """
    if not problem.gradient_field:
        raise MisuseError("mirror descent needs an operator that is a gradient field")
    geom, Q = problem.geometry, problem.Q
    x = check_feasible(Q, geom.center(Q) if z0 is None else z0, "z0", tol=1e-9)
    rec = _Recorder(problem, "mirror_descent", 1.0, metrics, keep_iterates)
    rec.record(0, x)
    for k in range(max_iters):
        x = prox_step(geom, Q, problem.g(x), [(1.0, x)])
        rec.record(k + 1, x, L=1.0, trials=1)
    return rec.finish()


SOLVERS = {
    "alg1": solve_adaptive,
    "alg2": solve_delta_additive,
    "alg3": solve_delta_multiplicative,
    "nonadaptive_eg": solve_nonadaptive_eg,
    "classical_eg": solve_classical_eg,
    "mirror_descent": solve_mirror_descent,
}


# -- theory -----------------------------------------------------------------

def trial_budget_slack(run, L, L0):
    """2N + log2(2L / L0) minus the total number of step-test trials."""
    N = run.n_iters
    return 2 * N + math.log2(2.0 * L / L0) - run.total_trials


def trial_budget_check(run, L, L0):
    """Whether the trial count respects sum_k trials_k <= 2N + log2(2L / L0)."""
    return trial_budget_slack(run, L, L0) >= 0


def theoretical_bound(L_sequence, mu, V0, variant="alg1", delta=0.0):
    """Right-hand sides of the convergence bounds on the realized L sequence.

    Entry k bounds V(z*, z_k); entry 0 is V0.  With r_i = (1 + mu / L_i)^-1:

    * alg1: prod_{i<=k} r_i V0
    * alg2: the alg1 term + sum_{j<=k} delta / (L_j + mu) prod_{j<i<=k} r_i
    * alg3: the alg1 term + delta sum_{j<=k} prod_{j<i<=k} r_i
    """
    L = np.asarray(L_sequence, dtype=float)
    if np.any(~(L > 0)):
        raise ValueError("L sequence must be positive")
    N = L.shape[0]
    log_r = -np.log1p(mu / L)
    log_P = np.concatenate([[0.0], np.cumsum(log_r)])
    bound = np.exp(log_P) * V0
    if variant == "alg1" or delta == 0.0:
        if variant not in ("alg1", "alg2", "alg3"):
            raise ValueError(f"unknown variant {variant!r}")
        return bound
    if variant == "alg2":
        terms = delta / (L + mu)
    elif variant == "alg3":
        terms = np.full(N, float(delta))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    extra = np.zeros(N + 1)
    for k in range(1, N + 1):
        # prod_{i=j+1}^{k} r_i = exp(log_P[k] - log_P[j]) for j = 1..k
        j = np.arange(1, k + 1)
        extra[k] = np.sum(terms[j - 1] * np.exp(log_P[k] - log_P[j]))
    return bound + extra


def uniform_bound(k, mu, L, V0, delta=0.0, variant="alg1"):
    """Bounds valid when every accepted L_i <= 2L (guaranteed for L0 <= 2L)."""
    k = np.asarray(k, dtype=float)
    base = (1.0 + mu / (2.0 * L)) ** (-k) * V0
    if variant == "alg3":
        return base + (1.0 + 2.0 * L / mu) * delta
    if variant == "alg1":
        return base
    raise ValueError("uniform bound is stated for alg1 and alg3 only")
