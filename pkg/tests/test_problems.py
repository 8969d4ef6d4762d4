import numpy as np
import pytest

from revi.core import certify_relative_strong_monotonicity
from revi.errors import InfeasibleError
from revi.geometry import BoxSimplexGeometry
from revi.metrics import (certify_relative_smoothness, erm_objective,
                          finite_difference_check)
from revi.problems import (BoxSimplexInstance, ErmInstance, box_simplex_start,
                           erm_reference_solution, estimate_similarity,
                           eval_box_simplex_operator, eval_erm_gradient, load_instance,
                           make_box_simplex, make_erm, make_synthetic_affine, save_instance,
                           with_radial_noise)
from revi.solvers import AdaptiveConfig, solve_adaptive


# -- box-simplex ----------------------------------------------------------------

@pytest.mark.parametrize("mu_y, mu_z", [(1e-2, 1e-2), (1e-6, 1e-2)])
def test_box_simplex_published_configurations(mu_y, mu_z):
    inst, p = make_box_simplex(200, mu_y, mu_z, 0)
    assert inst.A.shape == (200, 200) and np.array_equal(inst.A, inst.A.T)
    assert np.all(inst.A >= 0) and np.max(inst.A) <= 200 * 1e-6
    assert np.all((inst.b >= 0) & (inst.b <= 1)) and np.all((inst.c >= 0) & (inst.c <= 1))
    assert p.mu == min(mu_y, mu_z)
    assert inst.entropy_scale == 10 * np.max(np.abs(inst.A).sum(axis=1))


def test_box_simplex_is_reproducible():
    a, _ = make_box_simplex(30, 1e-2, 1e-2, 7)
    b, _ = make_box_simplex(30, 1e-2, 1e-2, 7)
    assert np.array_equal(a.A, b.A) and np.array_equal(a.b, b.b) and np.array_equal(a.c, b.c)
    np.testing.assert_array_equal(box_simplex_start(30, 7), box_simplex_start(30, 7))


def test_box_simplex_operator_reductions(rng):
    base, _ = make_box_simplex(6, 1e-2, 1e-2, 1)
    inst = BoxSimplexInstance(base.A, base.b, base.c, 0.0, 0.0, 1)
    x = np.concatenate([rng.uniform(-1, 1, 6), rng.dirichlet(np.ones(6))])
    g = eval_box_simplex_operator(inst, x)
    np.testing.assert_allclose(g, np.concatenate([inst.A.T @ x[6:] + inst.c,
                                                  inst.b - inst.A @ x[:6]]))
    inst, _ = make_box_simplex(6, 0.3, 0.3, 1)
    x0 = np.concatenate([np.zeros(6), np.full(6, 1 / 6)])
    np.testing.assert_allclose(eval_box_simplex_operator(inst, x0)[:6],
                               inst.A.T @ x0[6:] + inst.c, rtol=1e-15)
    with pytest.raises(InfeasibleError):
        eval_box_simplex_operator(inst, np.concatenate([np.full(6, 2.0), np.full(6, 1 / 6)]))


def test_box_simplex_prox_gradients_match_finite_differences(rng):
    inst, _ = make_box_simplex(5, 1e-2, 1e-2, 3)
    geo = BoxSimplexGeometry(rng.uniform(-1, 1, (5, 5)))
    pts = np.hstack([rng.uniform(-0.9, 0.9, (10, 5)), rng.uniform(0.1, 0.9, (10, 5))])
    assert finite_difference_check(geo.d, geo.grad_d, pts) <= 1e-6


def test_zero_matrix_game_converges_to_regularized_linear_solution():
    inst, p = make_box_simplex(4, 1e-1, 1e-1, 0, A=np.zeros((4, 4)))
    assert "entropy_scale_fallback" in p.notes
    z0 = np.concatenate([np.zeros(4), np.full(4, 0.25)])
    run = solve_adaptive(p, AdaptiveConfig(L0=1.0, mu=p.mu, max_iters=100), z0)
    z = np.exp(-inst.b / (inst.mu_z * inst.entropy_scale))
    np.testing.assert_allclose(run.final, np.concatenate([-np.sign(inst.c), z / z.sum()]),
                               atol=1e-10)


def test_box_simplex_rejects_tiny_n():
    with pytest.raises(ValueError):
        make_box_simplex(1, 1e-2, 1e-2, 0)


def test_box_simplex_monotonicity_sampler():
    _, p = make_box_simplex(20, 1e-2, 1e-2, 0)
    assert certify_relative_strong_monotonicity(p, samples=1000).min_slack >= -1e-8


# -- ERM ----------------------------------------------------------------------------

def test_erm_shapes_and_gamma_modes():
    inst, p = make_erm(5, 8, 3, 0.1, "exponential", 0)
    assert inst.A.shape == (3, 8, 5) and inst.b.shape == (3, 8)
    assert inst.gamma == estimate_similarity(inst) > 0
    assert p.notes["gamma"] == inst.gamma
    assert np.isclose(p.mu, 0.2 / (0.2 + 2 * inst.gamma))
    inst, p = make_erm(5, 8, 3, 0.1, "cauchy", 0)
    assert inst.gamma == 1e-2
    _, p = make_erm(5, 8, 3, 0.1, "exponential", 0, mu_mode="euclidean")
    assert p.mu == 0.2
    with pytest.raises(ValueError):
        make_erm(5, 8, 3, 0.1, "normal", 0)


def test_erm_gradient_examples(rng):
    inst, _ = make_erm(6, 10, 4, 0.1, "exponential", 2)
    expected = -np.einsum("jsn,js->n", inst.A, inst.b) / (inst.m * inst.s)
    np.testing.assert_allclose(eval_erm_gradient(inst, np.zeros(6)), expected, rtol=1e-13)
    pts = rng.uniform(-0.3, 0.3, (10, 6))
    assert finite_difference_check(lambda x: erm_objective(inst, x),
                                   lambda x: eval_erm_gradient(inst, x), pts) <= 1e-5


def test_erm_degenerate_instance_is_stationary():
    inst = ErmInstance(np.zeros((2, 3, 4)), np.zeros((2, 3)), 0.0, 1.0, 0, "exponential")
    np.testing.assert_array_equal(eval_erm_gradient(inst, np.full(4, 0.3)), np.zeros(4))


def test_erm_communication_counter():
    inst, p = make_erm(4, 5, 2, 0.1, "exponential", 0)
    for _ in range(7):
        p.g(np.zeros(4))
    assert inst.communication_rounds == 7


def test_similarity_examples(rng):
    A = rng.exponential(size=(1, 6, 4))
    single = ErmInstance(A, rng.random((1, 6)), 0.1, 0.0, 0, "exponential")
    assert estimate_similarity(single) == 0.0
    same = ErmInstance(np.repeat(A, 3, axis=0), rng.random((3, 6)), 0.1, 0.0, 0, "exponential")
    assert estimate_similarity(same) <= 1e-12
    inst, _ = make_erm(5, 5, 3, 0.1, "exponential", 4)
    S = (inst.A[0].T @ inst.A[0] - np.einsum("jsn,jsk->nk", inst.A, inst.A) / 3) / 5
    assert abs(estimate_similarity(inst) - np.max(np.abs(np.linalg.eigvalsh(S)))) <= 1e-8


def test_erm_relative_smoothness_flag():
    _, p = make_erm(10, 20, 5, 0.1, "exponential", 0)
    assert p.relative_smoothness == 1.0
    assert certify_relative_smoothness(p, 1.0, samples=300).passed


def test_erm_reference_solution_is_optimal(rng):
    inst, p = make_erm(6, 10, 3, 1e-3, "exponential", 1)
    x = erm_reference_solution(inst)
    assert np.linalg.norm(x) <= 1 + 1e-12
    F = erm_objective(inst, x)
    assert all(F <= erm_objective(inst, y) + 1e-12 for y in p.Q.sample(rng, 2000))


def test_cauchy_entries_are_clamped():
    inst, p = make_erm(20, 50, 10, 0.1, "cauchy", 0)
    assert np.max(np.abs(inst.A)) <= 1e6
    assert inst.clamped_entries == p.notes.get("cauchy_clamped_entries", 0)


# -- synthetic -----------------------------------------------------------------------

def test_synthetic_spectrum_and_solution():
    inst, p = make_synthetic_affine(20, 1.0, 10.0, 0)
    lam = np.linalg.eigvalsh(inst.M)
    assert np.isclose(lam[0], 1.0) and np.isclose(lam[-1], 10.0)
    np.testing.assert_allclose(p.g(inst.z_star), 0.0, atol=1e-15)
    assert p.Q.contains(inst.z_star)


def test_synthetic_mu_equals_L_gives_scaled_identity():
    inst, _ = make_synthetic_affine(6, 2.0, 2.0, 3)
    np.testing.assert_allclose(inst.M, 2.0 * np.eye(6), atol=1e-14)


def test_synthetic_structure_samplers():
    _, p = make_synthetic_affine(20, 1.0, 10.0, 0)
    assert certify_relative_strong_monotonicity(p, samples=1000).passed
    assert certify_relative_smoothness(p, 10.0, samples=1000).passed


def test_radial_noise_is_bounded_and_keeps_solution(rng):
    inst, p = make_synthetic_affine(8, 1.0, 10.0, 0)
    noisy = with_radial_noise(p, 1e-2, 0)
    assert noisy.relative_smoothness is None and not noisy.gradient_field
    for x in p.Q.sample(rng, 100):
        assert np.linalg.norm(noisy.g(x) - p.operator(x)) <= 1e-2 + 1e-15
    np.testing.assert_array_equal(noisy.g(inst.z_star), p.operator(inst.z_star))


# -- archives ---------------------------------------------------------------------

@pytest.mark.parametrize("maker", [lambda: make_box_simplex(5, 1e-2, 1e-6, 3)[0],
                                   lambda: make_erm(4, 6, 3, 0.1, "cauchy", 2)[0],
                                   lambda: make_synthetic_affine(5, 1.0, 4.0, 1)[0]])
def test_instance_roundtrip(tmp_path, maker):
    inst = maker()
    path = tmp_path / "inst.npz"
    save_instance(inst, path)
    back = load_instance(path)
    assert type(back) is type(inst)
    for name, value in vars(inst).items():
        other = getattr(back, name)
        if isinstance(value, np.ndarray):
            np.testing.assert_array_equal(value, other)
        elif isinstance(value, (int, float, str)):
            assert value == other
    if isinstance(inst, BoxSimplexInstance):
        assert back.entropy_scale == inst.entropy_scale
