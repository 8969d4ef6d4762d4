import math

import numpy as np
import pytest

from revi.core import VIProblem
from revi.errors import InfeasibleError, LineSearchError, MisuseError
from revi.geometry import EuclideanGeometry, QuadraticGeometry
from revi.metrics import erm_objective
from revi.problems import erm_start, make_erm, make_synthetic_affine, with_radial_noise
from revi.sets import EuclideanBall
from revi.solvers import (AdaptiveConfig, DeltaConfig, SOLVERS, solve_adaptive,
                          solve_classical_eg, solve_delta_additive, solve_delta_multiplicative,
                          solve_mirror_descent, solve_nonadaptive_eg, theoretical_bound,
                          trial_budget_check, trial_budget_slack, uniform_bound)


def _synthetic(n=20, mu=1.0, L=10.0, seed=0, noise=0.0):
    inst, p = make_synthetic_affine(n, mu, L, seed)
    if noise:
        p = with_radial_noise(p, noise, seed)
    return inst, p


def test_config_validation():
    with pytest.raises(ValueError):
        AdaptiveConfig(L0=0.0, mu=1.0, max_iters=10)
    with pytest.raises(ValueError):
        AdaptiveConfig(L0=1.0, mu=1.0, max_iters=0)
    with pytest.raises(ValueError):
        DeltaConfig(L0=1.0, mu=1.0, max_iters=1, delta=-1.0)


def test_solution_is_fixed_point():
    inst, p = _synthetic(5)
    run = solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=20), inst.z_star)
    assert max(np.max(np.abs(z - inst.z_star)) for z in run.z) <= 1e-9
    run = solve_nonadaptive_eg(p, L=10.0, max_iters=20, z0=inst.z_star)
    assert max(np.max(np.abs(z - inst.z_star)) for z in run.z) <= 1e-9


def test_adaptive_rate_small_instance():
    _, p = _synthetic(5)
    run = solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=100), p.geometry.center(p.Q))
    V = run.metrics["bregman_to_solution"].values
    assert V[100] <= (1 + 1 / 20) ** -100 * V[0]


def test_first_trial_acceptance_halves_L():
    _, p = _synthetic()
    run = solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=50), p.geometry.center(p.Q))
    L_prev = np.concatenate([[20.0], run.L[:-1]])
    np.testing.assert_array_equal(run.L, L_prev * 2.0 ** (run.trials - 2))
    first = run.trials == 1
    assert first.any()
    np.testing.assert_array_equal(run.L[first], L_prev[first] / 2)


def test_oracle_count_is_iterations_plus_trials():
    _, p = _synthetic()
    run = solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=60), p.geometry.center(p.Q))
    assert run.oracle_calls[-1] == run.n_iters + run.total_trials
    assert p.oracle_counter == run.oracle_calls[-1]
    np.testing.assert_array_equal(np.diff(run.oracle_calls), 1 + run.trials)


def test_step_test_holds_at_every_accepted_step():
    _, p = _synthetic()
    run = solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=80), p.geometry.center(p.Q))
    geo = p.geometry
    for k in range(run.n_iters):
        z, w, z1 = run.z[k], run.w[k], run.z[k + 1]
        lhs = (p.operator(z) - p.operator(w)) @ (z1 - w)
        assert lhs <= run.L[k] * (geo.divergence(w, z) + geo.divergence(z1, w))


def test_delta_zero_reduces_to_alg1():
    _, p = _synthetic()
    z0 = p.geometry.center(p.Q)
    ref = solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=100), z0)
    for fn in (solve_delta_additive, solve_delta_multiplicative):
        run = fn(p, DeltaConfig(L0=20.0, mu=1.0, max_iters=100, delta=0.0), z0)
        np.testing.assert_array_equal(run.L, ref.L)
        np.testing.assert_array_equal(run.trials, ref.trials)
        for a, b in zip(run.z, ref.z):
            np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("delta", [1e-3, 1e-2])
def test_noisy_recursions(delta):
    for fn, extra in ((solve_delta_additive, lambda L: delta / (L + 1.0)),
                      (solve_delta_multiplicative, lambda L: delta)):
        _, p = _synthetic(noise=delta)
        run = fn(p, DeltaConfig(L0=20.0, mu=1.0, max_iters=200, delta=delta),
                 p.geometry.center(p.Q))
        V = run.metrics["bregman_to_solution"].values
        assert np.all(V[1:] <= V[:-1] / (1 + 1.0 / run.L) + extra(run.L) + 1e-9)


def test_large_delta_accepts_every_first_trial():
    _, p = _synthetic(5)
    run = solve_delta_additive(p, DeltaConfig(L0=1.0, mu=1.0, max_iters=30, delta=1e6),
                               p.geometry.center(p.Q))
    assert np.all(run.trials == 1)
    np.testing.assert_array_equal(run.L, 2.0 ** -np.arange(1, 31))


def test_line_search_failure_carries_partial_run():
    _, p = _synthetic()
    cfg = AdaptiveConfig(L0=1e-3, mu=1.0, max_iters=10, max_trials_per_iter=1)
    with pytest.raises(LineSearchError) as info:
        solve_adaptive(p, cfg, p.geometry.center(p.Q))
    err = info.value
    assert err.run is not None and err.run.status == "line_search_failed"
    assert err.residual > 0 and err.last_L == 5e-4


def test_infeasible_start_rejected():
    _, p = _synthetic()
    with pytest.raises(InfeasibleError):
        solve_adaptive(p, AdaptiveConfig(L0=1.0, mu=1.0, max_iters=1), np.full(20, 100.0))


def test_nonadaptive_step_equals_adaptive_step_at_realized_L():
    # with L fixed to the accepted L_{k+1}, one non-adaptive step from z_k is z_{k+1}
    _, p = _synthetic()
    run = solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=40), p.geometry.center(p.Q))
    for k in range(run.n_iters):
        step = solve_nonadaptive_eg(p, L=run.L[k], max_iters=1, z0=run.z[k])
        np.testing.assert_array_equal(step.final, run.z[k + 1])


def test_nonadaptive_default_L_and_monotone_decrease():
    inst, p = _synthetic()
    run = solve_nonadaptive_eg(p, max_iters=100)
    assert run.L0 == 10.0
    V = run.metrics["bregman_to_solution"].values
    assert np.all(np.diff(V) <= 1e-15)


def test_nonadaptive_estimates_L_without_known_constant():
    _, p = _synthetic(noise=1e-3)
    solve_nonadaptive_eg(p, max_iters=2)
    assert p.notes["nonadaptive_L_estimate"] > 0


def test_classical_eg_examples():
    ball = EuclideanBall(np.zeros(1), 1.0)
    zero = VIProblem(lambda x: np.zeros(1), ball, EuclideanGeometry(), 1.0)
    run = solve_classical_eg(zero, step=0.5, max_iters=5, z0=np.array([0.3]))
    assert all(z[0] == 0.3 for z in run.z)
    ident = VIProblem(lambda x: x, ball, EuclideanGeometry(), 1.0)
    run = solve_classical_eg(ident, step=0.5, max_iters=1, z0=np.array([1.0]))
    assert run.w[0][0] == 0.5 and run.z[1][0] == 0.75
    with pytest.raises(MisuseError):
        solve_classical_eg(ident, max_iters=1)


def test_mirror_descent_examples():
    ball = EuclideanBall(np.zeros(2), 1.0)
    zero = VIProblem(lambda x: np.zeros(2), ball, EuclideanGeometry(), 1.0, gradient_field=True)
    run = solve_mirror_descent(zero, max_iters=3, z0=np.array([0.2, 0.1]))
    np.testing.assert_array_equal(run.final, [0.2, 0.1])
    # d = F: the mirror step lands on the interior minimizer in one step
    H = np.array([[2.0, 0.5], [0.5, 1.0]])
    x_opt = np.array([0.1, -0.2])
    quad = VIProblem(lambda x: H @ (x - x_opt), EuclideanBall(np.zeros(2), 5.0),
                     QuadraticGeometry(H, h=-H @ x_opt), 1.0, gradient_field=True)
    run = solve_mirror_descent(quad, max_iters=1, z0=np.array([1.0, 1.0]))
    np.testing.assert_allclose(run.final, x_opt, atol=1e-12)
    with pytest.raises(MisuseError):
        solve_mirror_descent(VIProblem(lambda x: x, ball, EuclideanGeometry(), 1.0))


def test_mirror_descent_erm_monotone_and_one_round_per_step():
    inst, p = make_erm(10, 20, 5, 0.1, "exponential", 0)
    run = solve_mirror_descent(p, max_iters=30, z0=erm_start(10),
                               metrics={"F": lambda x: erm_objective(inst, x)})
    assert np.all(np.diff(run.metrics["F"].values) <= 1e-12)
    assert inst.communication_rounds == 30


def test_trial_budget():
    _, p = _synthetic()
    run = solve_adaptive(p, AdaptiveConfig(L0=20.0, mu=1.0, max_iters=200),
                         p.geometry.center(p.Q))
    assert trial_budget_check(run, 10.0, 20.0)
    assert trial_budget_slack(run, 10.0, 20.0) == 2 * 200 + math.log2(2 * 10.0 / 20.0) - run.total_trials
    inflated = solve_adaptive(p, AdaptiveConfig(L0=20.0 * 2 ** 40, mu=1.0, max_iters=200),
                              p.geometry.center(p.Q))
    slack = trial_budget_slack(inflated, 10.0, 20.0 * 2 ** 40)
    assert math.isfinite(slack)
    assert trial_budget_check(inflated, 10.0, 20.0 * 2 ** 40) == (slack >= 0)


def test_trial_budget_first_trial_runs():
    class Fake:
        n_iters = 50
        total_trials = 50
    assert trial_budget_check(Fake(), 10.0, 20.0)
    assert trial_budget_check(Fake(), 10.0, 5.0)


def test_theoretical_bound_constant_L():
    b = theoretical_bound(np.full(10, 4.0), 1.0, 2.0)
    np.testing.assert_allclose(b, 2.0 * 1.25 ** -np.arange(11), rtol=1e-14)


def test_theoretical_bound_alg2_direct_evaluation():
    # V1 = 2/3 + 0.1/3, V2 = (4/5) V1 + 0.1/5, V3 = (8/9) V2 + 0.1/9
    b = theoretical_bound([2.0, 4.0, 8.0], 1.0, 1.0, "alg2", 0.1)
    np.testing.assert_allclose(b, [1.0, 0.7, 0.58, 4.74 / 9], rtol=1e-14)


def test_theoretical_bound_alg3_limit():
    L, mu, delta = 10.0, 1.0, 1e-3
    b = theoretical_bound(np.full(2000, 2 * L), mu, 1.0, "alg3", delta)
    r = 1 / (1 + mu / (2 * L))
    k = np.arange(2001)
    partial = delta * (1 - r ** k) / (1 - r)
    np.testing.assert_allclose(b, r ** k + partial, rtol=1e-12)
    assert math.isclose(b[-1], (1 + 2 * L / mu) * delta, rel_tol=1e-9)


def test_bounds_reject_bad_input():
    with pytest.raises(ValueError):
        theoretical_bound([1.0, -1.0], 1.0, 1.0)
    with pytest.raises(ValueError):
        theoretical_bound([1.0], 1.0, 1.0, "alg9", 0.1)
    with pytest.raises(ValueError):
        uniform_bound(np.arange(3), 1.0, 1.0, 1.0, variant="alg2")


def test_uniform_bound_values():
    np.testing.assert_allclose(uniform_bound(np.arange(3), 1.0, 10.0, 1.0),
                               [1.0, 1 / 1.05, 1 / 1.05 ** 2])
    assert uniform_bound(0, 1.0, 10.0, 1.0, 0.1, "alg3") == 1.0 + 21 * 0.1


def test_registry_names():
    assert set(SOLVERS) == {"alg1", "alg2", "alg3", "nonadaptive_eg", "classical_eg",
                            "mirror_descent"}
