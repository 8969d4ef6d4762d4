import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revi.core import (SlackReport, VIProblem, certify_relative_strong_monotonicity,
                       divergence, prox_objective, prox_optimality_residual, prox_step)
from revi.errors import DimensionError, InfeasibleError, NumericError, UnsupportedGeometryError
from revi.geometry import (BoxSimplexGeometry, DiagonalQuadraticGeometry, EntropyGeometry,
                           EuclideanGeometry, QuadraticGeometry)
from revi.problems import make_box_simplex
from revi.sets import Box, EuclideanBall, Product, Simplex


def _euclid_problem(M, mu=1.0, dim=2):
    M = np.asarray(M, dtype=float)
    return VIProblem(lambda x: M @ x, EuclideanBall(np.zeros(dim), 3.0), EuclideanGeometry(), mu)


def test_divergence_examples():
    assert divergence(EuclideanGeometry(), [1.0, 0.0], [0.0, 0.0]) == 0.5
    ent = EntropyGeometry(2)
    assert divergence(ent, [0.5, 0.5], [0.5, 0.5]) == 0.0
    assert math.isclose(divergence(ent, [0.5, 0.5], [0.25, 0.75]), 0.5 * math.log(4 / 3),
                        rel_tol=1e-14)


def test_divergence_errors():
    with pytest.raises(DimensionError):
        divergence(EuclideanGeometry(), [1.0, 0.0], [0.0])
    with pytest.raises(NumericError, match="y="):
        divergence(EuclideanGeometry(), [np.inf, 0.0], [0.0, 0.0])


def test_divergence_clamps_roundoff_negatives():
    class Wobbly(EuclideanGeometry):
        def divergence(self, y, x):
            return -1e-14

    assert divergence(Wobbly(), [1.0], [1.0]) == 0.0


def test_prox_step_examples():
    geo = EuclideanGeometry()
    Q = EuclideanBall(np.zeros(2), 10.0)
    np.testing.assert_allclose(prox_step(geo, Q, [1.0, 0.0], [(1.0, np.zeros(2))]), [-1.0, 0.0])
    np.testing.assert_allclose(
        prox_step(geo, Q, [0.0, 0.0], [(1.0, np.zeros(2)), (1.0, np.ones(2))]), [0.5, 0.5])


def test_prox_step_rejects_unsupported_set():
    with pytest.raises(UnsupportedGeometryError):
        prox_step(EntropyGeometry(3), Box.cube(3), np.zeros(3), [(1.0, np.full(3, 1 / 3))])


def test_prox_step_rejects_bad_anchors():
    with pytest.raises(ValueError):
        prox_step(EuclideanGeometry(), Box.cube(2), np.zeros(2), [])
    with pytest.raises(ValueError):
        prox_step(EuclideanGeometry(), Box.cube(2), np.zeros(2), [(0.0, np.zeros(2))])


def _geometries(rng):
    A = rng.uniform(-1, 1, (3, 3))
    B = rng.standard_normal((3, 3))
    return [
        (EuclideanGeometry(), EuclideanBall(np.zeros(3), 2.0)),
        (EntropyGeometry(4, 2.0), Simplex(4)),
        (DiagonalQuadraticGeometry([0.5, 1.0, 2.0]), Box.cube(3)),
        (BoxSimplexGeometry(A), Product((Box.cube(3), Simplex(3)))),
        (QuadraticGeometry(B @ B.T + 0.2 * np.eye(3)), EuclideanBall(np.ones(3), 1.0)),
    ]


def test_divergence_nonnegative_and_zero_on_diagonal(rng):
    for geo, Q in _geometries(rng):
        X, Y = Q.sample(rng, 1000), Q.sample(rng, 1000)
        assert np.min(geo.divergence(Y, X[0])) >= -1e-12
        assert np.min([geo.divergence(y, x) for x, y in zip(X[:200], Y[:200])]) >= -1e-12
        assert np.max(np.abs([geo.divergence(x, x) for x in X[:200]])) <= 1e-15


def test_stable_divergence_matches_definition(rng):
    for geo, Q in _geometries(rng):
        X, Y = Q.sample(rng, 200), Q.sample(rng, 200)
        for x, y in zip(X, Y):
            stable, naive = geo.divergence(y, x), geo.divergence_naive(y, x)
            assert abs(stable - naive) <= 1e-10 * max(1.0, abs(naive)) + 1e-12


def test_prox_step_quantified_optimality(rng):
    for geo, Q in _geometries(rng):
        for _ in range(5):
            anchors = [(rng.uniform(0.2, 2.0), Q.sample(rng, 1)[0]) for _ in range(2)]
            linear = rng.standard_normal(Q.dim)
            z = prox_step(geo, Q, linear, anchors)
            assert Q.contains(z, 1e-12)
            others = Q.sample(rng, 100)
            assert prox_objective(geo, linear, anchors, z) <= np.min(
                prox_objective(geo, linear, anchors, others)) + 1e-8
            assert prox_optimality_residual(geo, Q, linear, anchors, z, rng=rng) >= -1e-8


def test_prox_step_identity_on_anchor(rng):
    for geo, Q in _geometries(rng):
        x = Q.sample(rng, 1)[0]
        np.testing.assert_allclose(prox_step(geo, Q, np.zeros(Q.dim), [(1.0, x)]), x, atol=1e-9)


def test_oracle_counter_and_output_checks():
    p = _euclid_problem(np.eye(2))
    p.g(np.ones(2))
    p.g(np.ones(2))
    assert p.oracle_counter == 2
    bad = VIProblem(lambda x: np.array([np.nan, 0.0]), Box.cube(2), EuclideanGeometry(), 1.0)
    with pytest.raises(NumericError):
        bad.g(np.zeros(2))
    wrong = VIProblem(lambda x: np.zeros(3), Box.cube(2), EuclideanGeometry(), 1.0)
    with pytest.raises(DimensionError):
        wrong.g(np.zeros(2))


def test_problem_validation():
    with pytest.raises(ValueError):
        _euclid_problem(np.eye(2), mu=0.0)
    with pytest.raises(InfeasibleError):
        VIProblem(lambda x: x, Box.cube(2), EuclideanGeometry(), 1.0,
                  known_solution=np.array([2.0, 0.0]))


def test_monotonicity_sampler_examples():
    rep = certify_relative_strong_monotonicity(_euclid_problem(np.eye(2)), samples=500)
    assert rep.min_slack >= -1e-12 and rep.passed and rep.witnesses is None
    rep = certify_relative_strong_monotonicity(_euclid_problem(np.diag([1.0, 3.0])), samples=500)
    assert rep.min_slack >= 0
    _, p = make_box_simplex(20, 1e-2, 1e-3, 0)
    rep = certify_relative_strong_monotonicity(p, samples=1000, rng_seed=0)
    assert rep.passed


def test_monotonicity_sampler_reports_witness():
    rep = certify_relative_strong_monotonicity(_euclid_problem(np.eye(2), mu=2.0), samples=50)
    assert not rep.passed
    x, y = rep.witnesses
    assert x.shape == y.shape == (2,)
    with pytest.raises(ValueError):
        certify_relative_strong_monotonicity(_euclid_problem(np.eye(2)), samples=0)


def test_slack_report_threshold():
    assert SlackReport(-1e-9, None, 1).passed
    assert not SlackReport(-2e-8, None, 1).passed


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_entropy_prox_optimality_property(seed):
    rng = np.random.default_rng(seed)
    geo, Q = EntropyGeometry(5, rng.uniform(0.1, 5.0)), Simplex(5)
    anchors = [(rng.uniform(0.1, 3.0), Q.sample(rng, 1)[0]) for _ in range(rng.integers(1, 4))]
    linear = rng.standard_normal(5) * rng.uniform(0.1, 10)
    z = prox_step(geo, Q, linear, anchors)
    assert Q.contains(z, 1e-12)
    assert prox_optimality_residual(geo, Q, linear, anchors, z, rng=rng) >= -1e-8
