"""Gaussian conditional model reliance permutation.

Feature j is regressed on the remaining features in normal-score space, the
regression residuals are randomly permuted, the conditional mean is added
back, and the result is mapped back to the original scale through the
inverse normal-score map.  Only the unique information of the feature (the
residual) is shuffled, so the new column stays inside the observed support
and preserves the dependence on the other features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DegenerateColumn
from .gauss import NormalScores

__all__ = ["ConditionalModel", "fit_conditional", "conditional_for_feature", "gcmr_permute"]

_RIDGE_FALLBACK = 1e-8

# residuals below this relative size mean the feature is an exact function
# of the others at working precision; permuting them would only inject
# numerical noise, so the column is returned unchanged
_ZERO_RESIDUAL_RTOL = 1e-12


@dataclass(frozen=True)
class ConditionalModel:
    """Fitted conditional mean of one score column given the others.

    ``fitted + residuals`` reconstructs the score column exactly.  For the
    linear kind, ``coefficients`` is aligned to ``(intercept, regressors)``
    and ``collinear`` marks the ridge fallback.
    """

    feature_index: int
    kind: str
    coefficients: np.ndarray | None
    k: int | None
    fitted: np.ndarray
    residuals: np.ndarray
    collinear: bool = False


def fit_conditional(z: np.ndarray, j: int, kind: str = "linear",
                    k: int | None = None) -> ConditionalModel:
    """Estimate E[Z_j | Z_-j] on the score matrix ``z``.

    ``kind="linear"`` solves ordinary least squares of column j on the other
    columns (plus intercept) via SVD; under a Gaussian copula the conditional
    expectation is exactly linear, so this is the natural default.
    ``kind="knn"`` averages the k nearest rows of the other columns under
    Euclidean distance (default k = ceil(sqrt(N)), ties by row index).
    """
    z = np.asarray(z, dtype=float)
    n, d = z.shape
    if d < 2:
        raise ValueError("need at least 2 features to fit a conditional model")
    zj = z[:, j]
    others = np.delete(z, j, axis=1)
    if kind == "linear":
        A = np.hstack([np.ones((n, 1)), others])
        beta, _, rank, _ = np.linalg.lstsq(A, zj, rcond=None)
        collinear = rank < A.shape[1]
        if collinear:
            gram = A.T @ A + _RIDGE_FALLBACK * np.eye(A.shape[1])
            beta = np.linalg.solve(gram, A.T @ zj)
        fitted = A @ beta
        return ConditionalModel(j, kind, beta, None, fitted, zj - fitted, collinear)
    if kind == "knn":
        kk = k if k is not None else math.ceil(math.sqrt(n))
        if not 1 <= kk <= n:
            raise ValueError(f"k={kk} outside [1, {n}]")
        fitted = np.empty(n)
        step = max(1, int(2_000_000 // n))
        for lo in range(0, n, step):
            hi = min(lo + step, n)
            d2 = ((others[lo:hi, None, :] - others[None, :, :]) ** 2).sum(axis=2)
            idx = np.argsort(d2, axis=1, kind="stable")[:, :kk]
            fitted[lo:hi] = zj[idx].mean(axis=1)
        return ConditionalModel(j, kind, None, kk, fitted, zj - fitted)
    raise ValueError(f"unknown regression kind {kind!r}")


def conditional_for_feature(scores: NormalScores, j: int,
                            kind: str = "linear") -> ConditionalModel | None:
    """Conditional model of feature ``j``'s scores given the other
    non-degenerate features, or ``None`` when there is nothing to condition on."""
    if scores.maps[j] is None:
        raise DegenerateColumn(f"feature {j} is constant")
    active = scores.active
    if active.size < 2:
        return None
    j_act = int(np.searchsorted(active, j))
    return fit_conditional(scores.z[:, active], j_act, kind=kind)


def gcmr_permute(ds: Dataset, j: int, seed, kind: str = "linear",
                 scores: NormalScores | None = None,
                 conditional: ConditionalModel | None = None) -> np.ndarray:
    """Return a restricted-permutation replacement column for feature ``j``.

    Pipeline: fit normal-score maps, fit the conditional model for j, apply
    one uniform random permutation to the residuals, rebuild the score
    column, and map it back to the original scale.  Every returned value
    lies within the observed [min, max] of the feature.

    ``seed`` is an integer or a ``numpy.random.Generator``; ``scores`` and
    ``conditional`` let callers reuse fitted objects across replicates.
    """
    if scores is None:
        scores = NormalScores.fit(ds)
    if scores.maps[j] is None:
        raise DegenerateColumn(f"feature {j} is constant")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    if conditional is None:
        conditional = conditional_for_feature(scores, j, kind=kind)
    if conditional is None:
        # nothing to condition on: residual is the score itself
        resid = scores.z[:, j]
    else:
        resid = conditional.residuals

    scale = max(1.0, float(np.max(np.abs(scores.z[:, j]))))
    if float(np.max(np.abs(resid))) <= _ZERO_RESIDUAL_RTOL * scale:
        return ds.column(j).copy()

    pi = rng.permutation(ds.n)
    # algebraically fitted + resid[pi]; this form is exact on fixed points of pi
    z_new = scores.z[:, j] + (resid[pi] - resid)
    return scores.inverse_column(j, z_new)
