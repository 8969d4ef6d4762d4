"""Certification suite run by ``revi verify``.

Small fixed-seed instances exercise the prox kernels against brute-force
oracles, the structural assumptions (relative strong monotonicity, gradient
consistency), the convergence bounds, the line-search budget and the closed
form of the gap.
"""

import time
from dataclasses import dataclass

import numpy as np

from .core import certify_relative_strong_monotonicity, prox_step
from .errors import ReviError
from .geometry import (BoxSimplexGeometry, DiagonalQuadraticGeometry, EntropyGeometry,
                       QuadraticGeometry)
from .metrics import (box_simplex_gap, box_simplex_gap_oracle,
                      erm_objective, finite_difference_check, grid_prox_oracle)
from .problems import (BoxSimplexInstance, eval_erm_gradient, make_box_simplex, make_erm,
                       make_synthetic_affine, with_radial_noise)
from .sets import Box, EuclideanBall, Product, Simplex
from .solvers import (AdaptiveConfig, DeltaConfig, solve_adaptive, solve_delta_additive,
                      solve_delta_multiplicative, theoretical_bound, trial_budget_slack,
                      uniform_bound)

__all__ = ["SUITES", "CheckResult", "run_verify", "format_table"]

SUITES = ("prox", "monotonicity", "gradients", "theorems", "budget", "gap")


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _kernel_cases(rng, kernel_options):
    """(kernel name, geometry, set) triples with at most 3 free parameters."""
    opts = kernel_options or {}
    cases = []
    for d in (2, 3, 4):
        cases.append(("entropy_simplex", EntropyGeometry(d, rng.uniform(0.5, 2.0)), Simplex(d)))
    for d in (1, 2, 3):
        geom = DiagonalQuadraticGeometry(rng.uniform(0.1, 2.0, d))
        geom.kernel.__dict__.update(opts.get("weighted_box", {}))
        cases.append(("weighted_box", geom, Box.cube(d)))
    for n in (1, 2, 2):
        geom = BoxSimplexGeometry(rng.uniform(-1.0, 1.0, (n, n)),
                                  **opts.get("box_simplex", {}))
        cases.append(("box_simplex", geom, Product((Box.cube(n), Simplex(n)))))
    for d in (1, 2, 3):
        B = rng.standard_normal((d, d))
        geom = QuadraticGeometry(B @ B.T + 0.1 * np.eye(d))
        geom.kernel.__dict__.update(opts.get("quadratic_ball", {}))
        cases.append(("quadratic_ball", geom,
                      EuclideanBall(rng.uniform(-0.5, 0.5, d), rng.uniform(0.5, 2.0))))
    return cases


def _suite_prox(kernel_options):
    rng = np.random.default_rng(2024)
    worst = {}
    for name, geom, Q in _kernel_cases(rng, kernel_options):
        anchors = [(float(rng.uniform(0.2, 2.0)), Q.sample(rng, 1)[0])
                   for _ in range(int(rng.integers(1, 4)))]
        linear = rng.standard_normal(Q.dim) * rng.uniform(0.1, 5.0)
        try:
            z = prox_step(geom, Q, linear, anchors)
            err = float(np.max(np.abs(z - grid_prox_oracle(geom, Q, linear, anchors,
                                                           resolution=100))))
            if name == "box_simplex":
                hist = np.asarray(geom.kernel.last_info.objective)
                if np.any(np.diff(hist) > 1e-12 * (1.0 + np.abs(hist[:-1]))):
                    err = np.inf
        except ReviError as exc:
            err = np.inf
            worst.setdefault(f"{name}:error", str(exc))
        worst[name] = max(worst.get(name, 0.0), err)
    out = []
    for name in ("entropy_simplex", "weighted_box", "box_simplex", "quadratic_ball"):
        e = worst[name]
        detail = f"max |kernel - grid oracle| = {e:.2e} (tol 1e-5)"
        if f"{name}:error" in worst:
            detail += f"; {worst[name + ':error']}"
        out.append((f"kernel {name}", e <= 1e-5, detail))
    return out


def _suite_monotonicity(kernel_options):
    out = []
    _, p = make_box_simplex(10, 1e-2, 1e-2, 0)
    rep = certify_relative_strong_monotonicity(p, samples=300, rng_seed=0)
    out.append(("box-simplex relative strong monotonicity", rep.passed,
                f"min slack {rep.min_slack:.3e}"))
    _, p = make_synthetic_affine(10, 1.0, 10.0, 0)
    rep = certify_relative_strong_monotonicity(p, samples=300, rng_seed=0)
    out.append(("synthetic relative strong monotonicity", rep.passed,
                f"min slack {rep.min_slack:.3e}"))
    _, p = make_erm(5, 10, 4, 0.1, "exponential", 0)
    rep = certify_relative_strong_monotonicity(p, samples=300, rng_seed=0)
    out.append(("erm relative strong monotonicity", rep.passed,
                f"min slack {rep.min_slack:.3e}"))
    rng = np.random.default_rng(0)
    worst = 0.0
    for geom, Q in ((EntropyGeometry(5), Simplex(5)),
                    (BoxSimplexGeometry(rng.random((4, 4))), Product((Box.cube(4), Simplex(4))))):
        X, Y = Q.sample(rng, 200), Q.sample(rng, 200)
        worst = min(worst, float(np.min(geom.divergence(Y, X[0]))),
                    float(np.min([geom.divergence(x, x) for x in X])))
    out.append(("divergences nonnegative", worst >= -1e-12, f"min V {worst:.3e}"))
    return out


def _suite_gradients(kernel_options):
    out = []
    inst, _ = make_erm(6, 8, 4, 0.1, "exponential", 0)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-0.3, 0.3, (10, 6))
    err = finite_difference_check(lambda x: erm_objective(inst, x),
                                  lambda x: eval_erm_gradient(inst, x), pts)
    out.append(("erm grad F", err <= 1e-5, f"max rel err {err:.2e}"))
    geom = BoxSimplexGeometry(rng.random((3, 3)))
    pts = np.hstack([rng.uniform(-0.9, 0.9, (10, 3)), rng.uniform(0.2, 0.8, (10, 3))])
    err = finite_difference_check(geom.d, geom.grad_d, pts)
    out.append(("box-simplex grad d (both blocks)", err <= 1e-6, f"max rel err {err:.2e}"))
    return out


def _synthetic_run(noise=0.0, variant="alg1"):
    _, p = make_synthetic_affine(20, 1.0, 10.0, 0)
    if noise:
        p = with_radial_noise(p, noise, 0)
    z0 = p.geometry.center(p.Q)
    if variant == "alg1":
        return p, solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=200), z0)
    cfg = DeltaConfig(L0=20.0, mu=1.0, max_iters=200, delta=noise)
    fn = solve_delta_additive if variant == "alg2" else solve_delta_multiplicative
    return p, fn(p, cfg, z0)


def _suite_theorems(kernel_options):
    out = []
    p, run = _synthetic_run()
    V = run.metrics["bregman_to_solution"].values
    tol = 1e-9 * (1.0 + V[0])
    prod = theoretical_bound(run.L, 1.0, V[0])
    unif = uniform_bound(np.arange(len(V)), 1.0, 10.0, V[0])
    out.append(("alg1 product bound", bool(np.all(V <= prod + tol)),
                f"max excess {np.max(V - prod):.2e}"))
    out.append(("alg1 uniform bound", bool(np.all(V <= unif + tol)),
                f"max excess {np.max(V - unif):.2e}"))
    excess = np.max(V[1:] - V[:-1] / (1.0 + 1.0 / run.L))
    out.append(("alg1 per-step contraction", excess <= 1e-10, f"max excess {excess:.2e}"))
    for variant in ("alg2", "alg3"):
        for delta in (1e-3, 1e-2):
            _, r = _synthetic_run(delta, variant)
            V = r.metrics["bregman_to_solution"].values
            extra = delta / (r.L + 1.0) if variant == "alg2" else delta
            excess = np.max(V[1:] - (V[:-1] / (1.0 + 1.0 / r.L) + extra))
            out.append((f"{variant} recursion delta={delta:g}", excess <= 1e-9,
                        f"max excess {excess:.2e}"))
    for variant in ("alg2", "alg3"):
        _, r = _synthetic_run(0.0, variant)
        same = (np.array_equal(r.L, run.L) and np.array_equal(r.trials, run.trials)
                and np.array_equal(r.final, run.final))
        out.append((f"{variant} with delta=0 equals alg1", same, "bitwise trace comparison"))
    return out


def _suite_budget(kernel_options):
    _, run = _synthetic_run()
    slack = trial_budget_slack(run, 10.0, 20.0)
    mean = float(np.mean(run.trials))
    return [("trial budget 2N + log2(2L/L0)", slack >= 0, f"slack {slack:.3f}"),
            ("mean trials per iteration <= 3", mean <= 3.0, f"mean {mean:.3f}")]


def _suite_gap(kernel_options):
    rng = np.random.default_rng(7)
    worst, lowest = 0.0, np.inf
    for _ in range(20):
        n = int(rng.integers(1, 4))
        inst = BoxSimplexInstance(rng.uniform(-1, 1, (n, n)), rng.uniform(-1, 1, n),
                                  rng.uniform(-1, 1, n), 0.0, 0.0, 0)
        Q = Product((Box.cube(n), Simplex(n)))
        x = Q.sample(rng, 1)[0]
        g = box_simplex_gap(inst, x[:n], x[n:])
        worst = max(worst, abs(g - box_simplex_gap_oracle(inst, x[:n], x[n:])))
        lowest = min(lowest, g)
    return [("closed-form gap vs enumeration", worst <= 1e-6, f"max diff {worst:.2e}"),
            ("gap nonnegative", lowest >= -1e-12, f"min gap {lowest:.2e}")]


_RUNNERS = {"prox": _suite_prox, "monotonicity": _suite_monotonicity,
            "gradients": _suite_gradients, "theorems": _suite_theorems,
            "budget": _suite_budget, "gap": _suite_gap}


def run_verify(suites=None, kernel_options=None):
    """Run the selected suites (all by default) and return their check results.

    ``kernel_options`` maps a kernel name to attribute overrides; it exists so
    the suite itself can be shown to catch a mis-tuned kernel.
    """
    chosen = SUITES if not suites else tuple(suites)
    unknown = [s for s in chosen if s not in _RUNNERS]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    results = []
    for suite in chosen:
        t0 = time.perf_counter()
        try:
            checks = _RUNNERS[suite](kernel_options)
        except (ReviError, ValueError, ArithmeticError) as exc:
            checks = [(f"{suite} suite", False, f"{type(exc).__name__}: {exc}")]
        dt = time.perf_counter() - t0
        results += [CheckResult(suite, name, bool(ok), detail, dt / len(checks))
                    for name, ok, detail in checks]
    return results


def format_table(results):
    w_suite = max([len("suite")] + [len(r.suite) for r in results])
    w_name = max([len("check")] + [len(r.name) for r in results])
    lines = [f"{'suite':<{w_suite}}  {'check':<{w_name}}  result  detail"]
    for r in results:
        lines.append(f"{r.suite:<{w_suite}}  {r.name:<{w_name}}  "
                     f"{'PASS' if r.passed else 'FAIL':<6}  {r.detail}")
    return "\n".join(lines)
