"""Data model, CSV ingestion, empirical-distribution utilities and seeding.

Everything downstream (transforms, permutation strategies, estimators)
consumes the :class:`Dataset` container and draws randomness through
:class:`SeedPolicy`, which derives independent child streams from a single
master seed so that runs are reproducible regardless of execution order.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyData, IndexOutOfRange, MissingTarget, ParseError

__all__ = [
    "Dataset",
    "ColumnSummary",
    "SeedPolicy",
    "load_csv",
    "summarize",
    "empirical_cdf_values",
    "split_rows",
]


@dataclass(frozen=True)
class Dataset:
    """Column-major numeric feature matrix with named columns and a target.

    Parameters
    ----------
    features : ndarray, shape (N, d)
        Feature matrix, float64, all values finite.
    column_names : tuple of str
        Unique, nonempty names, one per feature column.
    target : ndarray, shape (N,)
        Target vector, float64, all values finite.
    target_name : str
        Name of the target column.
    """

    features: np.ndarray
    column_names: tuple[str, ...]
    target: np.ndarray
    target_name: str

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=float))
        tgt = np.asarray(self.target, dtype=float).ravel()
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "target", tgt)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        if feats.ndim != 2 or feats.shape[1] < 1:
            raise EmptyData("feature matrix must be N x d with d >= 1")
        if feats.shape[0] < 2:
            raise EmptyData(f"need at least 2 rows, got {feats.shape[0]}")
        if tgt.shape[0] != feats.shape[0]:
            raise EmptyData("target length does not match number of rows")
        if not np.isfinite(feats).all() or not np.isfinite(tgt).all():
            raise ParseError("non-finite values in dataset after ingestion")
        names = self.column_names
        if len(names) != feats.shape[1]:
            raise EmptyData("column_names length does not match d")
        if len(set(names)) != len(names) or any(not n for n in names):
            raise ParseError("column names must be unique and nonempty")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def column(self, j: int) -> np.ndarray:
        if not 0 <= j < self.d:
            raise IndexOutOfRange(f"column {j} outside [0, {self.d})")
        return self.features[:, j]

    def feature_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise IndexOutOfRange(f"unknown feature {name!r}") from None

    def replace_feature(self, j: int, values: np.ndarray) -> np.ndarray:
        """Copy of the feature matrix with column ``j`` replaced."""
        out = self.features.copy()
        out[:, j] = values
        return out


@dataclass(frozen=True)
class ColumnSummary:
    """Sample statistics of one column (variance uses divisor N-1)."""

    mean: float
    variance: float
    min: float
    max: float
    distinct_count: int


@dataclass(frozen=True)
class SeedPolicy:
    """Derives reproducible child streams from one 64-bit master seed.

    The child seed for a (purpose, feature, replicate) triple is a stable
    cryptographic hash of the tuple, so identical triples yield identical
    streams regardless of execution order or thread count.
    """

    master_seed: int

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    def child_seed(self, purpose: str, feature: int = -1, replicate: int = -1) -> int:
        msg = f"{self.master_seed}:{purpose}:{feature}:{replicate}".encode()
        return int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "big")

    def rng(self, purpose: str, feature: int = -1, replicate: int = -1) -> np.random.Generator:
        return np.random.default_rng(self.child_seed(purpose, feature, replicate))


def load_csv(path, target_column: str, missing_policy: str = "reject") -> Dataset:
    """Read a numeric CSV with a mandatory header row into a :class:`Dataset`.

    Cells must parse as decimal numbers; empty or non-finite cells are
    treated as missing.  Under ``missing_policy="reject"`` a missing cell
    raises :class:`~permsafe.errors.ParseError`; under ``"drop_row"`` the
    whole row is silently dropped.
    """
    if missing_policy not in ("reject", "drop_row"):
        raise ValueError(f"unknown missing_policy {missing_policy!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and not row[0].startswith("#")]
    if not rows:
        raise EmptyData(f"{path}: no header row")
    header = [h.strip() for h in rows[0]]
    if target_column not in header:
        raise MissingTarget(f"target column {target_column!r} not in header {header}")
    tgt_idx = header.index(target_column)
    names = tuple(h for i, h in enumerate(header) if i != tgt_idx)

    feat_rows, tgt_vals = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        parsed = []
        ok = True
        for cell in row:
            cell = cell.strip()
            v = math.nan
            if cell:
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
            if not math.isfinite(v):
                if missing_policy == "reject":
                    raise ParseError(f"{path}:{lineno}: unparseable cell {cell!r}")
                ok = False
                break
            parsed.append(v)
        if not ok:
            continue
        if len(parsed) != len(header):
            if missing_policy == "reject":
                raise ParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(parsed)}")
            continue
        tgt_vals.append(parsed[tgt_idx])
        feat_rows.append([v for i, v in enumerate(parsed) if i != tgt_idx])

    if len(feat_rows) < 2:
        raise EmptyData(f"{path}: {len(feat_rows)} usable rows, need at least 2")
    if not names:
        raise EmptyData(f"{path}: no feature columns besides the target")
    return Dataset(np.array(feat_rows), names, np.array(tgt_vals), target_column)


def summarize(ds: Dataset, column) -> ColumnSummary:
    """Exact sample statistics for a feature column (by index or name) or ``"target"``."""
    if column == "target":
        col = ds.target
    elif isinstance(column, str):
        col = ds.column(ds.feature_index(column))
    else:
        col = ds.column(int(column))
    return ColumnSummary(
        mean=float(np.mean(col)),
        variance=float(np.var(col, ddof=1)),
        min=float(np.min(col)),
        max=float(np.max(col)),
        distinct_count=int(np.unique(col).size),
    )


def empirical_cdf_values(column: np.ndarray) -> np.ndarray:
    """Hazen plotting positions ``(rank - 0.5) / N`` with midranks for ties.

    All outputs lie strictly inside (0, 1), which keeps the normal scores
    computed from them finite.  The result depends only on the ranks, so any
    strictly increasing transform of the input leaves it unchanged.
    """
    col = np.asarray(column, dtype=float)
    if col.ndim != 1 or col.size < 2:
        raise EmptyData("need a 1-d column with at least 2 values")
    ranks = rankdata(col, method="average")
    return (ranks - 0.5) / col.size


def split_rows(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded row split into (train, test) datasets."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n)
    n_test = max(2, int(round(ds.n * test_fraction)))
    n_test = min(n_test, ds.n - 2)
    test_idx, train_idx = np.sort(perm[:n_test]), np.sort(perm[n_test:])
    mk = lambda idx: Dataset(ds.features[idx], ds.column_names, ds.target[idx], ds.target_name)
    return mk(train_idx), mk(test_idx)
