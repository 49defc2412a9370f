"""Accumulated-local-effect curves and the two ALE-based importance indices.

The feature's support is partitioned into K bins (right-open, last bin
right-closed).  For every sample row the model is evaluated at the two edges
of the row's bin with the remaining features held fixed, which keeps every
evaluation point within one bin width of an observed point.  Accumulating
the per-bin mean differences yields the ALE curve; the same local effects
define a total-effect-like index (half the probability-weighted mean squared
bin difference) and a derivative-like index (variance-normalized mean
squared difference ratios).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, summarize
from .errors import DegenerateColumn, ZeroTargetVariance
from .models import Predictor

__all__ = [
    "ALEGrid",
    "ALECurve",
    "LocalEffects",
    "build_grid",
    "local_effects",
    "ale_curve",
    "tau_ale",
    "kappa_ale",
]


@dataclass(frozen=True)
class ALEGrid:
    """Bin edges and occupancy for one feature.

    Edges are strictly increasing and span the observed support; every
    sample row falls in exactly one bin and no bin is empty (empty bins are
    merged into their left neighbour at construction).  ``merged`` records
    whether any requested edges were dropped (ties or empty bins).
    """

    feature_index: int
    edges: np.ndarray
    counts: np.ndarray
    merged: bool = False

    @property
    def k(self) -> int:
        return self.edges.size - 1

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def widths(self) -> np.ndarray:
        return np.diff(self.edges)


def _assign_bins(col: np.ndarray, edges: np.ndarray) -> np.ndarray:
    # right-open bins, last bin right-closed
    return np.clip(np.searchsorted(edges, col, side="right") - 1, 0, edges.size - 2)


def build_grid(ds: Dataset, j: int, k: int, kind: str = "quantile") -> ALEGrid:
    """Partition feature ``j`` into at most ``k`` nonempty bins.

    ``"quantile"`` places edges at the empirical i/k quantiles (duplicate
    edges are collapsed, reducing k); ``"uniform"`` spaces them equally over
    [min, max].  Features with at most k+1 distinct values use the sorted
    distinct values themselves as edges, the grid the support forces.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if kind not in ("quantile", "uniform"):
        raise ValueError(f"unknown grid kind {kind!r}")
    col = ds.column(j)
    distinct = np.unique(col)
    if distinct.size < 2:
        raise DegenerateColumn(f"feature {j} is constant")

    requested = k
    if distinct.size <= k + 1:
        edges = distinct.astype(float)
    elif kind == "quantile":
        edges = np.unique(np.quantile(col, np.linspace(0.0, 1.0, k + 1)))
    else:
        edges = np.linspace(distinct[0], distinct[-1], k + 1)

    bins = _assign_bins(col, edges)
    counts = np.bincount(bins, minlength=edges.size - 1)
    while np.any(counts == 0):
        first_empty = int(np.argmin(counts > 0))
        # merge the empty bin into its left neighbour by dropping its left
        # edge (the leftmost bin always holds the sample minimum)
        edges = np.delete(edges, first_empty)
        bins = _assign_bins(col, edges)
        counts = np.bincount(bins, minlength=edges.size - 1)
    return ALEGrid(j, edges, counts, merged=edges.size - 1 != requested)


@dataclass(frozen=True)
class LocalEffects:
    """Paired edge predictions for every sample row.

    Row n in bin k carries predictions at (upper edge of k, x_-j of n) and
    (lower edge of k, x_-j of n); the model is queried exactly 2N times.
    """

    grid: ALEGrid
    bin_of: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def deltas(self) -> np.ndarray:
        return self.upper - self.lower


def local_effects(model: Predictor, ds: Dataset, grid: ALEGrid) -> LocalEffects:
    """Evaluate the model at both bin edges of every row, x_-j held fixed."""
    col = ds.column(grid.feature_index)
    bins = _assign_bins(col, grid.edges)
    pts = ds.features.copy()
    pts[:, grid.feature_index] = grid.edges[bins]
    lower = model(pts)
    pts[:, grid.feature_index] = grid.edges[bins + 1]
    upper = model(pts)
    return LocalEffects(grid, bins, lower, upper)


@dataclass(frozen=True)
class ALECurve:
    """Accumulated curve sampled at the grid edges (K+1 values).

    Uncentered curves start at exactly 0; centered curves subtract the
    bin-probability-weighted mean so the occupancy-weighted average of the
    accumulated values is 0.
    """

    grid: ALEGrid
    values: np.ndarray
    centered: bool

    def to_csv_rows(self):
        """Rows of ``edge,value,bin_count``; the count belongs to the bin
        ending at that edge (0 for the first edge)."""
        counts = np.concatenate([[0], self.grid.counts])
        return [(float(e), float(v), int(c))
                for e, v, c in zip(self.grid.edges, self.values, counts)]


def _bin_means(effects: LocalEffects, values: np.ndarray) -> np.ndarray:
    sums = np.bincount(effects.bin_of, weights=values, minlength=effects.grid.k)
    return sums / effects.grid.counts


def ale_curve(effects: LocalEffects, center: bool = False) -> ALECurve:
    """Accumulate per-bin mean differences into the ALE curve."""
    mean_delta = _bin_means(effects, effects.deltas())
    values = np.concatenate([[0.0], np.cumsum(mean_delta)])
    if center:
        values = values - float(np.sum(effects.grid.probabilities * values[1:]))
    return ALECurve(effects.grid, values, center)


def tau_ale(model: Predictor, ds: Dataset, grid: ALEGrid,
            effects: LocalEffects | None = None) -> float:
    """Total-effect-like ALE index: half the probability-weighted mean of the
    squared local differences."""
    if effects is None:
        effects = local_effects(model, ds, grid)
    mean_sq = _bin_means(effects, effects.deltas() ** 2)
    return 0.5 * float(np.sum(mean_sq * grid.probabilities))


def kappa_ale(model: Predictor, ds: Dataset, grid: ALEGrid,
              effects: LocalEffects | None = None,
              use_target_variance: bool = True) -> float:
    """Derivative-like ALE index: mean of per-bin averaged squared difference
    ratios, normalized by var(feature) / var(target).

    ``use_target_variance=False`` normalizes by the variance of the model
    predictions on the data instead of the observed target.
    """
    if effects is None:
        effects = local_effects(model, ds, grid)
    if use_target_variance:
        var_y = summarize(ds, "target").variance
    else:
        var_y = float(np.var(model(ds.features), ddof=1))
    if var_y <= 0.0:
        raise ZeroTargetVariance("target variance is zero")
    var_j = summarize(ds, grid.feature_index).variance
    ratios = effects.deltas() / grid.widths()[effects.bin_of]
    mean_sq = _bin_means(effects, ratios**2)
    return float(np.mean(mean_sq)) * var_j / var_y


def extrapolation_radius(grid: ALEGrid) -> float:
    """Largest L1 displacement between an evaluation point and its source row:
    the widest bin."""
    return float(np.max(grid.widths()))


__all__.append("extrapolation_radius")
