"""
Tests for LASSO coordinate descent.

Tests cover:
- Soft thresholding
- Exact recovery at lambda = 0, sparsity at large lambda
- Monotone objective path and the first-order optimality conditions
- The regularisation path: L1 norm, the all-zero threshold, the
  one-feature closed form, least squares at lambda = 0
- Zero-variance columns, non-convergence warning, input validation
- OLS slope helper
"""

import numpy as np
import pytest

from apps.forecasting.exceptions import (
    DimensionMismatch,
    NonFiniteInput,
    NotConvergedWarning,
    TooFewPoints,
)
from apps.forecasting.lasso import (
    fit_lasso,
    fit_ols_slope,
    predict,
    predict_many,
    soft_threshold,
)


@pytest.fixture
def regression():
    """Noiseless y = 3 + 2·x0 - x1 with an irrelevant third column."""
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 3))
    y = 3.0 + 2.0 * X[:, 0] - 1.0 * X[:, 1]
    return X, y


class TestSoftThreshold:
    @pytest.mark.parametrize(
        ("value", "expected"), [(3.0, 2.0), (-3.0, -2.0), (0.5, 0.0), (-1.0, 0.0)]
    )
    def test_values(self, value, expected):
        assert soft_threshold(value, 1.0) == expected


class TestFitLasso:
    """Tests for the coordinate-descent solver."""

    def test_recovers_ols_at_zero_lambda(self, regression):
        X, y = regression

        model = fit_lasso(X, y, lam=0.0, tol=1e-12, max_iter=50_000)

        np.testing.assert_allclose(model.coefficients, [2.0, -1.0, 0.0], atol=1e-6)
        assert model.intercept == pytest.approx(3.0, abs=1e-6)
        assert model.converged

    def test_large_lambda_zeroes_every_coefficient(self, regression):
        X, y = regression

        model = fit_lasso(X, y, lam=100.0)

        assert (model.coefficients == 0).all()
        assert model.intercept == pytest.approx(y.mean())

    def test_objective_never_increases(self, regression):
        X, y = regression

        model = fit_lasso(X, y, lam=0.1)

        path = np.array(model.objective_path)
        assert (np.diff(path) <= 1e-12).all()

    def test_kkt_conditions(self, regression):
        X, y = regression
        lam = 0.3

        model = fit_lasso(X, y, lam=lam, tol=1e-12, max_iter=50_000)

        Z = (X - model.feature_means) / model.feature_scales
        beta = model.coefficients * model.feature_scales
        residual = y - y.mean() - Z @ beta
        gradient = Z.T @ residual / len(y)
        for j in range(3):
            if beta[j] != 0:
                assert gradient[j] == pytest.approx(lam * np.sign(beta[j]), abs=1e-6)
            else:
                assert abs(gradient[j]) <= lam + 1e-6

    def test_zero_variance_column_gets_zero_coefficient(self, regression):
        X, y = regression
        X = np.column_stack([X, np.full(len(y), 5.0)])

        model = fit_lasso(X, y, lam=0.01)

        assert model.coefficients[-1] == 0.0

    def test_iteration_cap_warns_and_keeps_last_iterate(self, regression):
        X, y = regression

        with pytest.warns(NotConvergedWarning):
            model = fit_lasso(X, y, lam=0.0, tol=0.0, max_iter=2)

        assert not model.converged
        assert model.n_iter == 2

    def test_rejects_non_finite_inputs(self, regression):
        X, y = regression
        y = y.copy()
        y[0] = np.nan

        with pytest.raises(NonFiniteInput):
            fit_lasso(X, y, lam=0.1)

    def test_rejects_mismatched_target(self, regression):
        X, y = regression

        with pytest.raises(DimensionMismatch):
            fit_lasso(X, y[:-1], lam=0.1)


def standardised_l1(model):
    return float(np.abs(model.coefficients * model.feature_scales).sum())


def smallest_all_zero_lambda(X, y):
    """max_j |z_j · (y - ȳ)| / N on population-standardised columns."""
    Z = (X - X.mean(axis=0)) / X.std(axis=0)
    residual = y - y.mean()
    return max(abs(Z[:, j] @ residual / len(y)) for j in range(X.shape[1]))


class TestRegularisationPath:
    """Tests across values of lambda."""

    @pytest.fixture
    def noisy(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(80, 5))
        y = X @ np.array([1.5, -2.0, 0.0, 0.7, 0.0]) + rng.normal(scale=0.5, size=80)
        return X, y

    def test_l1_norm_grows_as_lambda_decreases(self, noisy):
        X, y = noisy
        lams = np.geomspace(smallest_all_zero_lambda(X, y), 1e-4, 25)

        norms = [
            standardised_l1(fit_lasso(X, y, lam, tol=1e-12, max_iter=100_000)) for lam in lams
        ]

        assert norms[0] == 0.0
        assert (np.diff(norms) >= -1e-8).all()

    def test_everything_is_zero_from_the_threshold_up(self, noisy):
        X, y = noisy
        threshold = smallest_all_zero_lambda(X, y)

        at = fit_lasso(X, y, threshold)
        below = fit_lasso(X, y, 0.99 * threshold)

        assert (at.coefficients == 0).all()
        assert np.count_nonzero(below.coefficients) >= 1

    @pytest.mark.parametrize("lam", [0.0, 0.1, 0.5, 5.0])
    def test_single_feature_is_soft_thresholded_correlation(self, lam):
        rng = np.random.default_rng(3)
        x = rng.normal(size=50)
        y = 1.2 * x + rng.normal(scale=0.3, size=50)
        z = (x - x.mean()) / x.std()
        correlation = z @ (y - y.mean()) / 50

        model = fit_lasso(x[:, None], y, lam)

        standardised = model.coefficients[0] * model.feature_scales[0]
        assert standardised == pytest.approx(soft_threshold(correlation, lam), abs=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_zero_lambda_matches_least_squares(self, seed):
        rng = np.random.default_rng(seed)
        n, p = int(rng.integers(30, 60)), int(rng.integers(1, 6))
        X = rng.normal(size=(n, p))
        y = 2.0 + X @ rng.normal(size=p) + rng.normal(size=n)
        solution, *_ = np.linalg.lstsq(np.column_stack([np.ones(n), X]), y, rcond=None)

        model = fit_lasso(X, y, 0.0, tol=1e-12, max_iter=100_000)

        np.testing.assert_allclose(model.coefficients, solution[1:], atol=1e-6)
        assert model.intercept == pytest.approx(solution[0], abs=1e-6)


class TestPredict:
    def test_predict_matches_predict_many(self, regression):
        X, y = regression
        model = fit_lasso(X, y, lam=0.05)

        assert predict(model, X[3]) == pytest.approx(predict_many(model, X)[3])

    def test_predict_checks_length(self, regression):
        X, y = regression
        model = fit_lasso(X, y, lam=0.05)

        with pytest.raises(DimensionMismatch):
            predict(model, X[3, :2])


class TestOlsSlope:
    def test_linear_series(self):
        assert fit_ols_slope([3.0, 5.0, 7.0, 9.0]) == pytest.approx(2.0)

    def test_needs_two_points(self):
        with pytest.raises(TooFewPoints):
            fit_ols_slope([1.0])
