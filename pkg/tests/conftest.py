"""Shared fixtures: benchmark datasets, predictors, and the optional
Boston Housing file used by the qualitative acceptance criterion."""

import os

import numpy as np
import pytest

from permsafe import Dataset, HookerSpec, exact_function_predictor, sample_hooker

BOSTON_ENV = "PERMSAFE_BOSTON_CSV"
BOSTON_DEFAULT = os.path.join(os.path.dirname(__file__), "data", "boston_housing.csv")


def boston_csv_path():
    """Path to the Boston Housing CSV, or None when missing.

    The public StatLib data ships as a fixture at the default path; the
    environment variable points tests at a different copy.
    """
    path = os.environ.get(BOSTON_ENV, BOSTON_DEFAULT)
    return path if os.path.exists(path) else None


@pytest.fixture(scope="session")
def hooker_predictor():
    return exact_function_predictor("hooker")


@pytest.fixture(scope="session")
def hooker_rho0():
    return sample_hooker(HookerSpec(rho=0.0, n=2000), seed=101)


@pytest.fixture(scope="session")
def hooker_rho09():
    return sample_hooker(HookerSpec(rho=0.9, n=2000), seed=101)


@pytest.fixture(scope="session")
def hooker_noisefree_small(hooker_predictor):
    """N=200 dataset whose targets equal the exact model's predictions."""
    ds = sample_hooker(HookerSpec(rho=0.5, n=200, noise_sd=0.0), seed=55)
    return Dataset(ds.features, ds.column_names,
                   hooker_predictor(ds.features), ds.target_name)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def write_csv(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
