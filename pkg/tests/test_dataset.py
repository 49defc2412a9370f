"""Dataset ingestion, summaries, empirical CDF values and seeding."""

import numpy as np
import pytest

from permsafe import (
    Dataset,
    SeedPolicy,
    empirical_cdf_values,
    load_csv,
    split_rows,
    summarize,
)
from permsafe.errors import EmptyData, IndexOutOfRange, MissingTarget, ParseError

from conftest import boston_csv_path, write_csv


class TestLoadCsv:
    def test_basic_three_rows(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "a,b,y\n1,2,3\n4,5,6\n7,8,9\n")
        ds = load_csv(p, "y")
        assert ds.n == 3 and ds.d == 2
        assert ds.column_names == ("a", "b")
        assert ds.target_name == "y"
        np.testing.assert_array_equal(ds.target, [3, 6, 9])
        np.testing.assert_array_equal(ds.features[:, 0], [1, 4, 7])

    def test_single_row_is_empty_data(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "a,y\n1,2\n")
        with pytest.raises(EmptyData):
            load_csv(p, "y")

    def test_missing_target(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "a,b\n1,2\n3,4\n")
        with pytest.raises(MissingTarget):
            load_csv(p, "z")

    def test_reject_policy_raises(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "a,y\n1,2\noops,4\n5,6\n")
        with pytest.raises(ParseError):
            load_csv(p, "y")

    def test_drop_row_policy(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "a,y\n1,2\noops,4\n,5\n5,6\n")
        ds = load_csv(p, "y", missing_policy="drop_row")
        assert ds.n == 2
        np.testing.assert_array_equal(ds.target, [2, 6])

    def test_non_finite_cells_follow_policy(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "a,y\n1,2\nnan,4\n5,6\n")
        with pytest.raises(ParseError):
            load_csv(p, "y")
        ds = load_csv(p, "y", missing_policy="drop_row")
        assert ds.n == 2

    def test_quoted_fields(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", 'a,y\n"1",2\n"3",4\n')
        ds = load_csv(p, "y")
        np.testing.assert_array_equal(ds.features[:, 0], [1, 3])

    def test_target_only_file(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "y\n1\n2\n")
        with pytest.raises(EmptyData):
            load_csv(p, "y")

    def test_boston_summary_if_available(self):
        path = boston_csv_path()
        if path is None:
            pytest.skip("Boston Housing CSV not available offline; see README")
        ds = load_csv(path, "MEDV")
        assert ds.n == 506 and ds.d == 13
        s = summarize(ds, "target")
        assert abs(s.mean - 22.53) < 0.01
        assert abs(s.variance - 84.30) < 0.4


class TestDatasetInvariants:
    def test_requires_two_rows(self):
        with pytest.raises(EmptyData):
            Dataset(np.array([[1.0, 2.0]]), ("a", "b"), np.array([1.0]), "y")

    def test_rejects_non_finite(self):
        with pytest.raises(ParseError):
            Dataset(np.array([[1.0], [np.nan]]), ("a",), np.array([1.0, 2.0]), "y")

    def test_rejects_duplicate_names(self):
        with pytest.raises(ParseError):
            Dataset(np.ones((3, 2)), ("a", "a"), np.ones(3), "y")

    def test_column_index_errors(self):
        ds = Dataset(np.ones((3, 2)), ("a", "b"), np.ones(3), "y")
        with pytest.raises(IndexOutOfRange):
            ds.column(5)
        with pytest.raises(IndexOutOfRange):
            ds.feature_index("nope")


class TestSummarize:
    def test_constant_column(self):
        ds = Dataset(np.full((10, 1), 5.0), ("a",), np.arange(10.0), "y")
        s = summarize(ds, 0)
        assert s.mean == 5.0 and s.variance == 0.0 and s.distinct_count == 1

    def test_two_point_sample(self):
        ds = Dataset(np.array([[0.0], [1.0]]), ("a",), np.zeros(2), "y")
        s = summarize(ds, 0)
        assert s.mean == 0.5 and s.variance == 0.5
        assert s.min == 0.0 and s.max == 1.0

    def test_uniform_variance_near_one_twelfth(self):
        col = np.random.default_rng(3).uniform(size=10000)
        ds = Dataset(col[:, None], ("a",), np.zeros(10000), "y")
        assert abs(summarize(ds, 0).variance - 1 / 12) < 0.01

    def test_by_name_and_target(self):
        ds = Dataset(np.array([[1.0], [3.0]]), ("a",), np.array([2.0, 4.0]), "y")
        assert summarize(ds, "a").mean == 2.0
        assert summarize(ds, "target").mean == 3.0


class TestEmpiricalCdf:
    def test_three_values(self):
        np.testing.assert_allclose(
            empirical_cdf_values(np.array([3.0, 1.0, 2.0])),
            [5 / 6, 1 / 6, 3 / 6])

    def test_full_tie_midrank(self):
        np.testing.assert_allclose(
            empirical_cdf_values(np.array([7.0, 7.0])), [0.5, 0.5])

    def test_sorted_distinct_strictly_increasing(self):
        u = empirical_cdf_values(np.arange(50.0))
        assert np.all(np.diff(u) > 0)

    def test_open_interval(self, rng):
        for _ in range(20):
            col = rng.choice([0.0, 1.0, 2.5, 7.0], size=rng.integers(2, 40))
            u = empirical_cdf_values(col)
            assert np.all(u > 0) and np.all(u < 1)

    def test_rank_equivariance_under_monotone_maps(self, rng):
        for transform in (np.exp, lambda v: v**3, lambda v: 5 * v - 2):
            col = rng.normal(size=200)
            col[::7] = col[0]  # inject ties
            np.testing.assert_array_equal(
                empirical_cdf_values(col), empirical_cdf_values(transform(col)))


class TestSeedPolicy:
    def test_reproducible_and_order_free(self):
        p = SeedPolicy(123)
        a = p.rng("perm", 2, 7).uniform(size=4)
        _ = p.rng("other", 0, 0).uniform(size=9)
        b = p.rng("perm", 2, 7).uniform(size=4)
        np.testing.assert_array_equal(a, b)

    def test_children_differ_by_any_field(self):
        p = SeedPolicy(123)
        seeds = {
            p.child_seed("a", 0, 0), p.child_seed("b", 0, 0),
            p.child_seed("a", 1, 0), p.child_seed("a", 0, 1),
            SeedPolicy(124).child_seed("a", 0, 0),
        }
        assert len(seeds) == 5

    def test_master_seed_range(self):
        with pytest.raises(ValueError):
            SeedPolicy(-1)
        SeedPolicy(2**64 - 1)


def test_split_rows_partitions(hooker_rho0):
    train, test = split_rows(hooker_rho0, 0.2, seed=4)
    assert train.n + test.n == hooker_rho0.n
    assert test.n == round(hooker_rho0.n * 0.2)
    merged = np.sort(np.concatenate([train.target, test.target]))
    np.testing.assert_array_equal(merged, np.sort(hooker_rho0.target))
