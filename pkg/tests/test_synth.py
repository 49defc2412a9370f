"""Benchmark sampling and the two ground-truth routes."""

import numpy as np
import pytest
from scipy.stats import kstest, spearmanr

from permsafe import (
    HookerSpec,
    analytic_ground_truth_independent,
    oracle_ground_truth,
    sample_hooker,
)
from permsafe.errors import RhoNotZero

# published per-feature reference values (4 decimals), independent case
PUBLISHED_INDEPENDENT = (0.1667, 0.1667, 0.1667, 0.1667, 0.1667,
                         0.0, 0.0417, 0.1067, 0.2400, 0.3750)


class TestSampleHooker:
    def test_independent_case_exact_targets(self):
        spec = HookerSpec(rho=0.0, noise_sd=0.0, n=2000)
        ds = sample_hooker(spec, seed=3)
        r = np.corrcoef(ds.column(0), ds.column(1))[0, 1]
        assert abs(r) < 0.05
        np.testing.assert_allclose(ds.target,
                                   ds.features @ np.asarray(spec.coefficients),
                                   atol=1e-12)

    def test_rank_correlation_matches_copula_formula(self):
        # Spearman rho of a Gaussian copula: (6/pi) asin(rho/2)
        ds = sample_hooker(HookerSpec(rho=0.9, n=2000), seed=5)
        rho_s = spearmanr(ds.column(0), ds.column(1)).statistic
        assert abs(rho_s - 0.8914561316801002) < 0.04

    def test_zscore_correlation_near_rho(self):
        from permsafe import NormalScores
        ds = sample_hooker(HookerSpec(rho=0.9, n=2000), seed=6)
        z = NormalScores.fit(ds).z
        assert abs(np.corrcoef(z[:, 0], z[:, 1])[0, 1] - 0.9) < 0.03

    def test_marginals_uniform(self):
        ds = sample_hooker(HookerSpec(rho=0.95, n=2000), seed=7)
        for j in range(ds.d):
            assert kstest(ds.column(j), "uniform").pvalue > 0.01

    def test_noise_enters_target_only(self):
        a = sample_hooker(HookerSpec(rho=0.3, noise_sd=0.0, n=500), seed=8)
        b = sample_hooker(HookerSpec(rho=0.3, noise_sd=0.1, n=500), seed=8)
        np.testing.assert_array_equal(a.features, b.features)
        assert not np.array_equal(a.target, b.target)

    def test_deterministic(self):
        a = sample_hooker(HookerSpec(rho=0.5, n=100), seed=9)
        b = sample_hooker(HookerSpec(rho=0.5, n=100), seed=9)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.target, b.target)


class TestAnalyticGroundTruth:
    def test_matches_published_values(self):
        truth = analytic_ground_truth_independent(HookerSpec(rho=0.0))
        np.testing.assert_allclose(truth.values, PUBLISHED_INDEPENDENT, atol=5e-5)
        assert truth.provenance == "analytic"

    def test_zero_coefficient_exactly_zero(self):
        truth = analytic_ground_truth_independent(HookerSpec(rho=0.0))
        assert truth.values[5] == 0.0

    def test_requires_rho_zero(self):
        with pytest.raises(RhoNotZero):
            analytic_ground_truth_independent(HookerSpec(rho=0.5))


class TestOracle:
    def test_self_consistency_at_rho_zero(self):
        truth = oracle_ground_truth(HookerSpec(rho=0.0), outer=1000, inner=1000, seed=3)
        analytic = analytic_ground_truth_independent(HookerSpec(rho=0.0))
        np.testing.assert_allclose(truth.values, analytic.values, atol=0.006)
        assert truth.provenance == "oracle-mc"

    def test_correlated_pair_value(self):
        # closed form for the copula pair: nu_1 = 2(1/12 - asin(c/(1+c))/2pi)
        # with c = rho^2/(2-rho^2); at rho=0.9 this is 0.033938, compatible
        # with the published 0.0332 +- 0.003
        truth = oracle_ground_truth(HookerSpec(rho=0.9), outer=2000, inner=2000, seed=4)
        for j in (0, 1):
            assert abs(truth.values[j] - 0.03393818255106171) < 0.002
            assert abs(truth.values[j] - 0.0332) < 0.003

    def test_uncorrelated_features_unchanged_by_rho(self):
        # X3..X10 are independent of the copula pair, so their conditional
        # total index stays at beta^2/6 for every rho; the oracle's Monte
        # Carlo error grows with beta^2, hence the scaled tolerance
        truth = oracle_ground_truth(HookerSpec(rho=0.9), outer=2000, inner=2000, seed=4)
        beta = np.asarray(HookerSpec().coefficients)
        np.testing.assert_allclose(truth.values[2:5], 1.0 / 6.0, atol=0.005)
        tol = 0.005 * np.maximum(1.0, beta[5:] ** 2)
        assert np.all(np.abs(truth.values[5:] - beta[5:] ** 2 / 6.0) <= tol)

    def test_zero_coefficient_exactly_zero(self):
        truth = oracle_ground_truth(HookerSpec(rho=0.9), outer=200, inner=200, seed=5)
        assert truth.values[5] == 0.0

    def test_noise_sd_does_not_enter(self):
        a = oracle_ground_truth(HookerSpec(rho=0.5, noise_sd=0.0), 200, 200, seed=6)
        b = oracle_ground_truth(HookerSpec(rho=0.5, noise_sd=0.3), 200, 200, seed=6)
        np.testing.assert_array_equal(a.values, b.values)

    def test_deterministic_and_documented(self):
        a = oracle_ground_truth(HookerSpec(rho=0.5), 200, 200, seed=7)
        b = oracle_ground_truth(HookerSpec(rho=0.5), 200, 200, seed=7)
        np.testing.assert_array_equal(a.values, b.values)
        d = a.to_dict()
        assert d["provenance"] == "oracle-mc"
        assert d["oracle"] == {"outer": 200, "inner": 200, "seed": 7}

    def test_loop_size_preconditions(self):
        with pytest.raises(ValueError):
            oracle_ground_truth(HookerSpec(), outer=50, inner=200, seed=0)
        with pytest.raises(ValueError):
            oracle_ground_truth(HookerSpec(), outer=200, inner=99, seed=0)
