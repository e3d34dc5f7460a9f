"""Loss links, empirical risks, gradients and Lipschitz bounds."""

import math

import numpy as np
import pytest

from levelproj.oracles import finite_difference_gradient
from levelproj.risk import (LossKind, RiskModel, Task, curvature_at_zero,
                            loss_derivative, loss_value, posterior)

BOTH = [LossKind.LOGISTIC, LossKind.MATSUSITA]


class TestLossValues:
    def test_logistic_at_zero(self):
        assert loss_value(LossKind.LOGISTIC, 0.0) == pytest.approx(
            math.log(2.0), abs=1e-15)

    def test_matsusita_at_zero(self):
        assert loss_value(LossKind.MATSUSITA, 0.0) == 0.5

    def test_logistic_extreme_negative_margin_no_overflow(self):
        # Extended-precision oracle: ln(1 + e^800) = 800 + ln(1 + e^-800).
        import mpmath
        expected = float(mpmath.log(1 + mpmath.e ** 800))
        got = loss_value(LossKind.LOGISTIC, -800.0)
        assert np.isfinite(got)
        assert got == pytest.approx(expected, abs=1e-9)

    def test_matsusita_no_cancellation_at_large_margin(self):
        # (sqrt(1+t^2) - t)/2 ~ 1/(4t) for large t.
        t = 1e8
        assert loss_value(LossKind.MATSUSITA, t) == pytest.approx(
            1.0 / (4.0 * t), rel=1e-12)

    @pytest.mark.parametrize("kind", BOTH)
    def test_convexity_probe(self, kind):
        rng = np.random.default_rng(len(kind.value))
        for _ in range(1000):
            t1, t2 = rng.uniform(-20, 20, size=2)
            lam = rng.random()
            mid = loss_value(kind, lam * t1 + (1 - lam) * t2)
            chord = lam * loss_value(kind, t1) + (1 - lam) * loss_value(kind, t2)
            assert mid <= chord + 1e-12

    @pytest.mark.parametrize("kind", BOTH)
    def test_vectorized_matches_scalar(self, kind):
        t = np.linspace(-5, 5, 11)
        vec = loss_value(kind, t)
        assert vec.shape == t.shape
        for ti, vi in zip(t, vec):
            assert loss_value(kind, float(ti)) == vi


class TestLossDerivative:
    @pytest.mark.parametrize("kind", BOTH)
    def test_value_at_zero(self, kind):
        assert loss_derivative(kind, 0.0) == pytest.approx(-0.5, abs=1e-15)

    def test_matches_finite_difference(self):
        h = 1e-5
        for kind in BOTH:
            for t in (-3.0, -0.7, 0.3, 2.0):
                fd = (loss_value(kind, t + h) - loss_value(kind, t - h)) / (2 * h)
                assert loss_derivative(kind, t) == pytest.approx(fd, abs=1e-8)

    @pytest.mark.parametrize("kind", BOTH)
    def test_equals_posterior_minus_one(self, kind):
        rng = np.random.default_rng(7)
        t = rng.uniform(-50, 50, size=200)
        np.testing.assert_allclose(loss_derivative(kind, t),
                                   posterior(kind, t) - 1.0, atol=1e-12)

    @pytest.mark.parametrize("kind", BOTH)
    def test_bounded_and_increasing(self, kind):
        t = np.linspace(-40, 40, 4001)
        d = loss_derivative(kind, t)
        assert np.all(d >= -1.0) and np.all(d <= 0.0)
        assert np.all(np.diff(d) >= 0.0)


class TestPosterior:
    @pytest.mark.parametrize("kind", BOTH)
    def test_half_at_zero(self, kind):
        assert posterior(kind, 0.0) == 0.5

    def test_logistic_value(self):
        import mpmath
        expected = float(1 / (1 + mpmath.e ** -1))
        assert posterior(LossKind.LOGISTIC, 1.0) == pytest.approx(
            expected, abs=1e-15)

    @pytest.mark.parametrize("kind", BOTH)
    def test_antisymmetry(self, kind):
        rng = np.random.default_rng(21)
        s = rng.uniform(-30, 30, size=100)
        np.testing.assert_allclose(posterior(kind, -s),
                                   1.0 - posterior(kind, s), atol=1e-12)

    @pytest.mark.parametrize("kind", BOTH)
    def test_range_and_monotone(self, kind):
        s = np.linspace(-100, 100, 2001)
        f = posterior(kind, s)
        assert np.all((f >= 0.0) & (f <= 1.0))
        assert np.all(np.diff(f) >= 0.0)


class TestRiskModel:
    def _classification_instance(self, seed=0, m=20, d=10,
                                 loss=LossKind.LOGISTIC):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((m, d))
        y = np.where(rng.random(m) < 0.5, -1.0, 1.0)
        return RiskModel.classification(X, y, loss)

    def test_classification_risk_at_zero(self):
        model = self._classification_instance()
        assert model.value(np.zeros(10)) == pytest.approx(math.log(2.0),
                                                          abs=1e-12)

    def test_regression_risk_at_zero(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((12, 4))
        y = rng.standard_normal(12)
        model = RiskModel.regression(X, y)
        assert model.value(np.zeros(4)) == pytest.approx(
            0.5 * np.mean(y ** 2), abs=1e-14)

    def test_single_sample_logistic(self):
        model = RiskModel.classification(np.array([[1.0, 0.0]]),
                                         np.array([1.0]))
        assert model.value(np.array([2.0, 5.0])) == pytest.approx(
            math.log(1 + math.exp(-2.0)), abs=1e-14)

    def test_gradient_at_zero_closed_form(self):
        model = self._classification_instance(seed=5)
        expected = -(model.X * model.y[:, None]).sum(axis=0) / (2 * model.m)
        np.testing.assert_allclose(model.gradient(np.zeros(10)), expected,
                                   atol=1e-15)

    @pytest.mark.parametrize("loss", BOTH)
    def test_gradient_matches_finite_difference(self, loss):
        model = self._classification_instance(seed=11, loss=loss)
        rng = np.random.default_rng(12)
        w = rng.standard_normal(10)
        fd = finite_difference_gradient(model.value, w, h=1e-5)
        g = model.gradient(w)
        assert np.linalg.norm(g - fd) / np.linalg.norm(g) <= 1e-5

    def test_regression_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((20, 10))
        y = rng.standard_normal(20)
        model = RiskModel.regression(X, y)
        w = rng.standard_normal(10)
        fd = finite_difference_gradient(model.value, w, h=1e-5)
        g = model.gradient(w)
        assert np.linalg.norm(g - fd) / np.linalg.norm(g) <= 1e-5

    def test_regression_gradient_vanishes_at_normal_equations_solution(self):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((20, 8))
        y = rng.standard_normal(20)
        model = RiskModel.regression(X, y)
        w_star = np.linalg.lstsq(X, y, rcond=None)[0]
        assert np.linalg.norm(model.gradient(w_star)) <= 1e-10

    def test_value_and_gradient_consistent(self):
        model = self._classification_instance(seed=19)
        w = np.random.default_rng(20).standard_normal(10)
        value, grad = model.value_and_gradient(w)
        assert value == model.value(w)
        np.testing.assert_array_equal(grad, model.gradient(w))

    def test_dimension_mismatch(self):
        model = self._classification_instance()
        with pytest.raises(ValueError):
            model.value(np.zeros(11))
        with pytest.raises(ValueError):
            model.gradient(np.zeros(3))

    def test_bad_labels_rejected(self):
        with pytest.raises(ValueError):
            RiskModel.classification(np.ones((3, 2)),
                                     np.array([1.0, 0.0, -1.0]))

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            RiskModel.regression(np.ones(3), np.ones(3))
        with pytest.raises(ValueError):
            RiskModel.regression(np.ones((3, 2)), np.ones(4))


class TestLipschitzBound:
    def test_logistic_normalized_features(self):
        rng = np.random.default_rng(23)
        X = rng.standard_normal((15, 6))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        y = np.where(rng.random(15) < 0.5, -1.0, 1.0)
        model = RiskModel.classification(X, y, LossKind.LOGISTIC)
        assert model.lipschitz_bound() == pytest.approx(0.25, abs=1e-12)

    def test_matsusita_single_sample(self):
        # phi''(0) = 1/2 and ||x||^2 = 4 with m = 1 gives 2.
        model = RiskModel.classification(np.array([[2.0, 0.0]]),
                                         np.array([-1.0]), LossKind.MATSUSITA)
        assert model.lipschitz_bound() == pytest.approx(2.0, abs=1e-12)

    def test_curvature_constants(self):
        assert curvature_at_zero(LossKind.LOGISTIC) == 0.25
        assert curvature_at_zero(LossKind.MATSUSITA) == 0.5

    def test_regression_identity_matrix(self):
        m = 6
        model = RiskModel.regression(np.eye(m), np.ones(m))
        assert model.lipschitz_bound() == pytest.approx(1.05 / m, rel=1e-9)

    @pytest.mark.parametrize("task", [Task.CLASSIFICATION, Task.REGRESSION])
    def test_bound_dominates_sampled_gradient_variation(self, task):
        rng = np.random.default_rng(29)
        X = rng.standard_normal((30, 12))
        if task is Task.CLASSIFICATION:
            y = np.where(rng.random(30) < 0.5, -1.0, 1.0)
            model = RiskModel.classification(X, y, LossKind.MATSUSITA)
        else:
            y = rng.standard_normal(30)
            model = RiskModel.regression(X, y)
        bound = model.lipschitz_bound()
        for _ in range(1000):
            u = rng.standard_normal(12) * rng.uniform(0.1, 5.0)
            v = rng.standard_normal(12) * rng.uniform(0.1, 5.0)
            lhs = np.linalg.norm(model.gradient(u) - model.gradient(v))
            assert lhs <= bound * np.linalg.norm(u - v)
