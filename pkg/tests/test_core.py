"""Constraint evaluation, gradients, game losses, oracles, and estimates."""

import math

import numpy as np
import pytest

import feasgame as fg
from conftest import constant_problem, family_samples, fd_gradient, interior_simplex


class TestEvaluate:
    def test_affine(self):
        f = fg.Affine(a=np.array([1.0, 0.0]), b=0.0)
        assert fg.evaluate(f, np.array([0.3, 0.7])) == pytest.approx(0.3, abs=1e-15)

    def test_quadratic_identity_at_vertex(self):
        f = fg.Quadratic(A=np.eye(2), b=np.zeros(2), c=0.0)
        assert fg.evaluate(f, np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-15)

    def test_neg_entropy_uniform(self):
        f = fg.NegEntropy(n=2, shift=0.0)
        val = fg.evaluate(f, np.array([0.5, 0.5]))
        assert val == pytest.approx(-math.log(2.0), abs=1e-12)

    def test_neg_entropy_needs_positive_coordinates(self):
        f = fg.NegEntropy(n=2, shift=0.0)
        with pytest.raises(fg.EvaluationDomainError):
            fg.evaluate(f, np.array([1.0, 0.0]))

    def test_dimension_mismatch(self):
        f = fg.Affine(a=np.array([1.0, 0.0]), b=0.0)
        with pytest.raises(fg.DimensionMismatch):
            fg.evaluate(f, np.array([1.0, 0.0, 0.0]))

    def test_batch_matches_loop(self, rng):
        for f in family_samples(rng, 3):
            X = interior_simplex(rng, 3, 40)
            batch = fg.evaluate_batch(f, X)
            loop = np.array([fg.evaluate(f, x) for x in X])
            assert np.allclose(batch, loop, rtol=0, atol=1e-12)


class TestGradient:
    def test_affine_gradient_is_coefficient(self):
        a = np.array([2.0, -3.0])
        g = fg.gradient(fg.Affine(a=a, b=1.0), np.array([0.5, 0.5]))
        assert np.array_equal(g, a)

    def test_quadratic_identity(self):
        f = fg.Quadratic(A=np.eye(2), b=np.zeros(2), c=0.0)
        g = fg.gradient(f, np.array([0.2, 0.8]))
        assert np.allclose(g, [0.4, 1.6], atol=1e-15)

    def test_log_composite_at_vertex(self):
        inner = fg.Affine(a=np.array([1.0, 0.0]), b=0.0)
        f = fg.LogAffineComposite(inner=inner, omega=1.0)
        g = fg.gradient(f, np.array([0.0, 1.0]))
        assert np.allclose(g, [1.0 / math.e, 0.0], atol=1e-12)

    def test_matches_finite_differences_all_families(self, rng):
        for n in (2, 3, 5):
            for f in family_samples(rng, n):
                for x in interior_simplex(rng, n, 25):
                    g = fg.gradient(f, x)
                    ref = fd_gradient(f, x)
                    assert np.linalg.norm(g - ref) <= 1e-5 * (1.0 + np.linalg.norm(g))


class TestGameLoss:
    def test_point_mass_recovers_constraint_exactly(self, rng):
        prob = fg.make_problem(
            [fg.Affine(a=rng.normal(size=3), b=0.2) for _ in range(4)],
            fg.Simplex(n=3),
        )
        x = interior_simplex(rng, 3, 1)[0]
        for j in range(4):
            p = np.zeros(4)
            p[j] = 1.0
            assert fg.game_loss(prob, x, p) == fg.evaluate(prob.constraints[j], x)

    def test_balanced_constants_cancel(self):
        prob = constant_problem([1.0, -1.0])
        assert fg.game_loss(prob, np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0

    def test_two_affine_mixture(self):
        prob = fg.make_problem(
            [fg.Affine(a=np.array([1.0, 0.0]), b=0.0),
             fg.Affine(a=np.array([0.0, 1.0]), b=0.0)],
            fg.Simplex(n=2),
        )
        val = fg.game_loss(prob, np.array([0.3, 0.7]), np.array([0.25, 0.75]))
        assert val == pytest.approx(0.6, abs=1e-12)

    def test_mixture_matches_direct_sum(self, rng):
        prob = fg.make_problem(
            [fg.Affine(a=rng.normal(size=2), b=float(rng.normal())) for _ in range(5)],
            fg.Simplex(n=2),
        )
        for x in interior_simplex(rng, 2, 10):
            p = rng.dirichlet(np.ones(5))
            direct = sum(p[j] * fg.evaluate(prob.constraints[j], x) for j in range(5))
            assert fg.game_loss(prob, x, p) == pytest.approx(direct, abs=1e-12)

    def test_rejects_bad_distribution(self):
        prob = constant_problem([0.0, 0.0])
        with pytest.raises(fg.InvalidDistribution):
            fg.game_loss(prob, np.array([0.5, 0.5]), np.array([0.7, 0.7]))
        with pytest.raises(fg.InvalidDistribution):
            fg.game_loss(prob, np.array([0.5, 0.5]), np.array([-0.5, 1.5]))


class TestSeparationOracle:
    def test_all_satisfied_is_fail(self):
        prob = constant_problem([-0.5, 0.0])
        assert fg.separation_oracle(prob, np.array([0.5, 0.5]), 0.0) is None

    def test_returns_violated_index_and_value(self):
        prob = constant_problem([0.05, 0.2])
        hit = fg.separation_oracle(prob, np.array([0.5, 0.5]), 0.1)
        assert hit == fg.Violation(index=1, value=0.2)

    def test_lowest_index_wins(self):
        prob = constant_problem([0.2, 0.3])
        hit = fg.separation_oracle(prob, np.array([0.5, 0.5]), 0.1)
        assert hit.index == 0
        assert hit.value == pytest.approx(0.2, abs=1e-15)

    def test_negative_eps_rejected(self):
        prob = constant_problem([0.0])
        with pytest.raises(fg.SetupError):
            fg.separation_oracle(prob, np.array([0.5, 0.5]), -0.1)

    def test_fail_iff_worst_residual_below_eps(self, rng):
        prob = fg.make_problem(
            [fg.Affine(a=rng.normal(size=2), b=float(rng.normal())) for _ in range(6)],
            fg.Simplex(n=2),
        )
        for x in interior_simplex(rng, 2, 50):
            worst = max(fg.residuals(prob, x))
            hit = fg.separation_oracle(prob, x, 0.1)
            assert (hit is None) == (worst <= 0.1)
            if hit is not None:
                assert hit.value > 0.1


class TestOptimizationOracle:
    def test_affine_vertex_minimum(self):
        prob = fg.make_problem([fg.Affine(a=np.array([-1.0, 1.0]), b=0.0)], fg.Simplex(n=2))
        x = fg.optimization_oracle(prob, np.array([1.0]), tol=0.05)
        assert np.allclose(x, [1.0, 0.0], atol=1e-12)
        assert fg.game_loss(prob, x, np.array([1.0])) == pytest.approx(-1.0, abs=1e-12)

    def test_affine_vertex_matches_full_scan(self, rng):
        for _ in range(20):
            cons = [fg.Affine(a=rng.normal(size=4), b=float(rng.normal())) for _ in range(3)]
            prob = fg.make_problem(cons, fg.Simplex(n=4))
            p = rng.dirichlet(np.ones(3))
            combined = sum(p[j] * cons[j].a for j in range(3))
            offset = sum(p[j] * cons[j].b for j in range(3))
            best = min(combined[i] + offset for i in range(4))
            x = fg.optimization_oracle(prob, p, tol=1e-6)
            if best > 0:
                assert x is None
            else:
                assert fg.game_loss(prob, x, p) == pytest.approx(best, abs=1e-12)

    def test_positive_minimum_is_fail(self):
        prob = fg.make_problem([fg.NormDistSq(center=np.zeros(2), c=0.0)], fg.Simplex(n=2))
        assert fg.optimization_oracle(prob, np.array([1.0]), tol=0.05) is None

    def test_satisfiable_returns_domain_point(self):
        prob = constant_problem([-1.0])
        x = fg.optimization_oracle(prob, np.array([1.0]), tol=0.05)
        assert fg.domain_contains(prob.domain, x)
        assert fg.game_loss(prob, x, np.array([1.0])) <= 0.0

    def test_smooth_fail_certified_beyond_tol(self, rng):
        # min over the simplex of ||x - c||^2 with far-away center stays > tol
        prob = fg.make_problem(
            [fg.NormDistSq(center=np.array([3.0, 3.0]), c=0.0)], fg.Simplex(n=2)
        )
        assert fg.optimization_oracle(prob, np.array([1.0]), tol=0.05) is None


class TestEstimates:
    def test_affine_gradient_norm(self):
        prob = fg.make_problem([fg.Affine(a=np.array([3.0, 4.0]), b=0.0)], fg.Simplex(n=2))
        assert prob.params.G == pytest.approx(5.0, abs=1e-12)

    def test_simplex_diameter(self):
        prob = constant_problem([0.0], n=2)
        assert prob.params.D == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_quadratic_curvature(self):
        prob = fg.make_problem(
            [fg.Quadratic(A=np.eye(2), b=np.zeros(2), c=0.0)], fg.Simplex(n=2)
        )
        assert prob.params.H == pytest.approx(2.0, abs=1e-12)

    def test_sampled_points_respect_bounds(self, rng):
        cons = [
            fg.Affine(a=rng.normal(size=3), b=float(rng.normal())),
            fg.Quadratic(A=np.eye(3) * 0.5, b=rng.normal(size=3), c=0.1),
            fg.NormDistSq(center=rng.normal(size=3) * 0.3, c=0.2),
        ]
        prob = fg.make_problem(cons, fg.Simplex(n=3))
        X = fg.sample_domain(prob.domain, 10_000, seed=7)
        for f in prob.constraints:
            vals = fg.evaluate_batch(f, X)
            assert np.max(np.abs(vals)) <= prob.params.omega + 1e-9
        for f in prob.constraints:
            for x in X[:300]:
                assert np.linalg.norm(fg.gradient(f, x)) <= prob.params.G + 1e-9

    def test_check_distribution(self):
        fg.check_distribution(np.array([0.5, 0.5]), 2)
        with pytest.raises(fg.InvalidDistribution):
            fg.check_distribution(np.array([0.5, 0.6]), 2)
        with pytest.raises(fg.InvalidDistribution):
            fg.check_distribution(np.array([0.5, 0.5]), 3)


class TestResidualConvention:
    def test_min_sense_residual_is_value(self, rng):
        prob = fg.make_problem([fg.Affine(a=rng.normal(size=2), b=0.1)], fg.Simplex(n=2))
        x = np.array([0.5, 0.5])
        assert fg.residual(prob, 0, x) == fg.evaluate(prob.constraints[0], x)

    def test_max_sense_residual_flips(self):
        base = fg.make_problem([fg.Affine(a=np.array([1.0, -1.0]), b=0.0)], fg.Simplex(n=2))
        prob = fg.log_transform(base)
        x = np.array([0.5, 0.5])
        val = fg.evaluate(prob.constraints[0], x)
        assert fg.residual(prob, 0, x) == pytest.approx(1.0 - val, abs=1e-15)

    def test_residual_gradient_matches_fd(self, rng):
        base = fg.make_problem([fg.Affine(a=np.array([0.5, -0.5]), b=0.0)], fg.Simplex(n=2))
        for prob in (base, fg.log_transform(base)):
            for x in interior_simplex(rng, 2, 10):
                g = fg.residual_gradient(prob, 0, x)
                h = 1e-6
                ref = np.zeros(2)
                for i in range(2):
                    e = np.zeros(2)
                    e[i] = h
                    ref[i] = (fg.residual(prob, 0, x + e) - fg.residual(prob, 0, x - e)) / (2 * h)
                assert np.allclose(g, ref, atol=1e-6)
