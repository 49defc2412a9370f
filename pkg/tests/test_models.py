"""Predictor contract, built-in regressors, and fit reports."""

import json

import numpy as np
import pytest

from permsafe import (
    Dataset,
    HookerSpec,
    LinearPredictor,
    exact_function_predictor,
    fit_knn,
    fit_ols,
    sample_hooker,
    split_rows,
)
from permsafe.errors import InsufficientRows, InvalidK, UnknownExpression


class TestExactPredictors:
    def test_hooker_at_half(self):
        g = exact_function_predictor("hooker")
        assert g.predict_row(np.full(10, 0.5)) == 4.5

    def test_zero_coefficients_constant(self):
        g = exact_function_predictor("linear", beta=np.zeros(4))
        np.testing.assert_array_equal(g(np.random.default_rng(0).normal(size=(7, 4))),
                                      np.zeros(7))

    def test_deterministic_across_calls(self, rng):
        g = exact_function_predictor("hooker")
        X = rng.uniform(size=(20, 10))
        np.testing.assert_array_equal(g(X), g(X))

    def test_unknown_expression(self):
        with pytest.raises(UnknownExpression):
            exact_function_predictor("not-a-thing")

    def test_batch_matches_rowwise(self, rng):
        g = exact_function_predictor("hooker")
        X = rng.uniform(size=(15, 10))
        batch = g(X)
        rows = np.array([g.predict_row(x) for x in X])
        np.testing.assert_allclose(batch, rows, atol=1e-12)


def _linear_dataset(n, beta, noise_sd, seed, intercept=0.0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, len(beta)))
    y = intercept + X @ np.asarray(beta) + noise_sd * rng.standard_normal(n)
    return Dataset(X, tuple(f"x{k}" for k in range(len(beta))), y, "y")


class TestFitOls:
    def test_exact_recovery_noise_free(self):
        beta = [1.5, -2.0, 0.25]
        ds = _linear_dataset(200, beta, 0.0, seed=2, intercept=0.7)
        pred, report = fit_ols(ds)
        assert report.r2 > 1 - 1e-9
        np.testing.assert_allclose(pred.coefficients, beta, atol=1e-6)
        assert abs(pred.intercept - 0.7) < 1e-6

    def test_matches_pseudoinverse_oracle(self, rng):
        # brute-force normal-equations solution on small instances
        for _ in range(5):
            n, d = int(rng.integers(10, 50)), int(rng.integers(1, 5))
            X = rng.normal(size=(n, d))
            y = rng.normal(size=n)
            ds = Dataset(X, tuple(f"x{k}" for k in range(d)), y, "y")
            pred, _ = fit_ols(ds)
            A = np.hstack([np.ones((n, 1)), X])
            beta_oracle = np.linalg.pinv(A) @ y
            np.testing.assert_allclose(
                np.concatenate([[pred.intercept], pred.coefficients]),
                beta_oracle, atol=1e-8)

    def test_hooker_fit_quality(self, hooker_rho0):
        train, test = split_rows(hooker_rho0, 0.25, seed=9)
        pred, report = fit_ols(train, test=test)
        assert report.r2 > 0.985
        assert 0.007 < report.mse < 0.014
        assert report.n_train == train.n and report.n_test == test.n

    def test_interaction_terms_only_pairwise(self):
        ds = _linear_dataset(300, [1.0, 2.0, 0.5], 0.0, seed=3)
        pred, _ = fit_ols(ds, interactions=True)
        assert pred.coefficients.size == 3 + 3  # d + d(d-1)/2
        assert pred.pairs == [(0, 1), (0, 2), (1, 2)]

    def test_interactions_recover_product_term(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(size=(400, 2))
        y = X[:, 0] + 3.0 * X[:, 0] * X[:, 1]
        ds = Dataset(X, ("a", "b"), y, "y")
        pred, report = fit_ols(ds, interactions=True)
        assert report.r2 > 1 - 1e-9
        assert abs(pred.coefficients[-1] - 3.0) < 1e-6

    def test_constant_target_intercept_only(self):
        ds = _linear_dataset(50, [0.0, 0.0], 0.0, seed=5, intercept=4.2)
        pred, report = fit_ols(ds)
        assert report.mse < 1e-18
        assert abs(pred.intercept - 4.2) < 1e-8

    def test_insufficient_rows(self):
        ds = _linear_dataset(5, [1.0, 1.0, 1.0, 1.0], 0.0, seed=6)
        with pytest.raises(InsufficientRows):
            fit_ols(ds, interactions=True)

    def test_collinear_flag(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=100)
        X = np.column_stack([x, x, rng.normal(size=100)])
        ds = Dataset(X, ("a", "b", "c"), x + 1.0, "y")
        pred, _ = fit_ols(ds)
        assert pred.collinear
        assert np.all(np.isfinite(pred.coefficients))

    def test_json_round_trip(self, tmp_path):
        ds = _linear_dataset(100, [2.0, -1.0], 0.0, seed=8)
        pred, _ = fit_ols(ds, interactions=True)
        path = tmp_path / "model.json"
        pred.save(path)
        loaded = LinearPredictor.from_json_dict(json.loads(path.read_text()))
        X = np.random.default_rng(1).uniform(size=(10, 2))
        np.testing.assert_allclose(loaded(X), pred(X), atol=1e-15)


class TestFitKnn:
    def test_k_equals_n_is_target_mean(self):
        ds = _linear_dataset(80, [1.0, 1.0], 0.1, seed=10)
        pred, _ = fit_knn(ds, k=80)
        np.testing.assert_allclose(pred(ds.features),
                                   np.full(80, ds.target.mean()), atol=1e-12)

    def test_k_one_memorizes_training_rows(self):
        ds = _linear_dataset(60, [1.0, -1.0], 0.2, seed=11)
        pred, _ = fit_knn(ds, k=1)
        np.testing.assert_allclose(pred(ds.features), ds.target, atol=1e-12)

    def test_sqrt_n_beats_mean_on_hooker(self, hooker_rho0):
        train, test = split_rows(hooker_rho0, 0.2, seed=13)
        pred, report = fit_knn(train, k=int(np.ceil(np.sqrt(train.n))), test=test)
        assert report.r2 > 0.5

    def test_invalid_k(self):
        ds = _linear_dataset(30, [1.0], 0.0, seed=12)
        for bad in (0, 31, -3):
            with pytest.raises(InvalidK):
                fit_knn(ds, k=bad)

    def test_batch_matches_rowwise(self):
        ds = _linear_dataset(50, [1.0, 2.0], 0.1, seed=14)
        pred, _ = fit_knn(ds, k=5)
        X = np.random.default_rng(2).uniform(size=(9, 2))
        rows = np.array([pred.predict_row(x) for x in X])
        np.testing.assert_allclose(pred(X), rows, atol=1e-12)


def test_builtins_declare_concurrency_safety(hooker_rho0):
    g = exact_function_predictor("hooker")
    ols, _ = fit_ols(hooker_rho0)
    knn, _ = fit_knn(hooker_rho0, k=10)
    assert g.concurrent_safe and ols.concurrent_safe and knn.concurrent_safe


def test_hooker_spec_validation():
    with pytest.raises(ValueError):
        HookerSpec(rho=1.0)
    with pytest.raises(ValueError):
        HookerSpec(noise_sd=-0.1)
    with pytest.raises(ValueError):
        HookerSpec(n=1)
    assert sample_hooker(HookerSpec(n=10), 0).n == 10
