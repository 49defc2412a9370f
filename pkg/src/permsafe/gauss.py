"""Invertible per-feature mapping between sample values and normal scores.

Each feature is mapped through its empirical CDF (Hazen positions, midranks
for ties) and then through the standard-normal quantile function.  The map
interpolates linearly between observed order statistics and clamps outside
them, so any finite score maps back to a value inside the observed support.
This is the shared first stage of the GCMR and GKnock permutation
strategies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .dataset import Dataset, empirical_cdf_values
from .errors import DegenerateColumn

__all__ = ["NormalScoreMap", "NormalScores", "fit_normal_score_map"]


@dataclass(frozen=True)
class NormalScoreMap:
    """Monotone piecewise-linear bijection between one feature and its scores.

    ``values`` holds the sorted distinct sample values and ``scores`` the
    matching normal scores; tied observations share a midrank and therefore
    a single knot.  Both arrays are strictly increasing.
    """

    feature_index: int
    values: np.ndarray
    scores: np.ndarray
    n_obs: int

    def forward(self, x) -> np.ndarray:
        """Map values to scores; clamps to the extreme scores outside the sample."""
        return np.interp(x, self.values, self.scores)

    def inverse(self, z) -> np.ndarray:
        """Map scores to values; never leaves [sample min, sample max]."""
        return np.interp(z, self.scores, self.values)


def _fit_from_column(col: np.ndarray, j: int) -> tuple[NormalScoreMap, np.ndarray]:
    """Return (map, in-sample score column) for one feature."""
    col = np.asarray(col, dtype=float)
    scores = ndtri(empirical_cdf_values(col))
    order = np.argsort(col, kind="stable")
    xs, zs = col[order], scores[order]
    uniq, first = np.unique(xs, return_index=True)
    if uniq.size < 2:
        raise DegenerateColumn(f"feature {j} is constant")
    return NormalScoreMap(j, uniq, zs[first], col.size), scores


def fit_normal_score_map(ds: Dataset, j: int) -> NormalScoreMap:
    """Fit the normal-score map of feature ``j``.

    Raises :class:`~permsafe.errors.DegenerateColumn` for constant features;
    callers should skip those and assign importance 0.
    """
    return _fit_from_column(ds.column(j), j)[0]


@dataclass(frozen=True)
class NormalScores:
    """All per-feature maps of a dataset plus the in-sample score matrix.

    Degenerate (constant) features get a ``None`` map and an all-zero score
    column; they are listed in ``degenerate`` so downstream estimators can
    flag them and exclude them from regression designs.
    """

    maps: tuple
    z: np.ndarray
    degenerate: tuple[int, ...]

    @classmethod
    def fit(cls, ds: Dataset) -> "NormalScores":
        maps, bad = [], []
        z = np.zeros_like(ds.features)
        for j in range(ds.d):
            try:
                m, scores = _fit_from_column(ds.column(j), j)
            except DegenerateColumn:
                maps.append(None)
                bad.append(j)
                continue
            maps.append(m)
            z[:, j] = scores
        return cls(tuple(maps), z, tuple(bad))

    @property
    def active(self) -> np.ndarray:
        """Indices of non-degenerate features."""
        return np.array([j for j, m in enumerate(self.maps) if m is not None], dtype=int)

    def inverse_column(self, j: int, z: np.ndarray) -> np.ndarray:
        m = self.maps[j]
        if m is None:
            raise DegenerateColumn(f"feature {j} is constant")
        return m.inverse(z)
