"""Black-box predictor contract plus built-in regressors.

The importance estimators only ever call :meth:`Predictor.predict` on
matrices of feature rows, so any external model can be plugged in by
subclassing.  The built-ins (exact analytic forms, ordinary least squares
with optional pairwise interactions, k-nearest-neighbour averaging) are
enough for desk-scale verification with known ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InsufficientRows, InvalidK, PredictorFailure, UnknownExpression

__all__ = [
    "Predictor",
    "LinearPredictor",
    "OLSPredictor",
    "KnnPredictor",
    "FitReport",
    "exact_function_predictor",
    "register_expression",
    "fit_ols",
    "fit_knn",
]


class Predictor:
    """Evaluator from feature rows to real predictions.

    Subclasses implement :meth:`predict` on an (M, d) matrix; predictions
    must be pure (identical inputs give identical outputs) and finite.
    ``concurrent_safe`` declares whether predict may be called from several
    threads at once.
    """

    name: str = "predictor"
    n_features: int = 0
    concurrent_safe: bool = True

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_row(self, x: np.ndarray) -> float:
        return float(self.predict(np.asarray(x, dtype=float)[None, :])[0])

    def __call__(self, X: np.ndarray) -> np.ndarray:
        out = np.asarray(self.predict(np.asarray(X, dtype=float)), dtype=float)
        if not np.isfinite(out).all():
            raise PredictorFailure(f"{self.name}: non-finite prediction")
        return out


def _interaction_pairs(d: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(d) for b in range(a + 1, d)]


def _expand(X: np.ndarray, pairs) -> np.ndarray:
    if not pairs:
        return X
    inter = np.column_stack([X[:, a] * X[:, b] for a, b in pairs])
    return np.hstack([X, inter])


class LinearPredictor(Predictor):
    """Affine (optionally pairwise-interaction-expanded) form, evaluated exactly."""

    def __init__(self, coefficients, intercept: float = 0.0, pairs=None, name: str = "linear"):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.intercept = float(intercept)
        self.pairs = [tuple(p) for p in pairs] if pairs else []
        self.name = name
        if self.pairs:
            self.n_features = int(self.coefficients.size - len(self.pairs))
        else:
            self.n_features = int(self.coefficients.size)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return _expand(np.asarray(X, dtype=float), self.pairs) @ self.coefficients + self.intercept

    def to_json_dict(self) -> dict:
        return {
            "kind": "linear",
            "name": self.name,
            "intercept": self.intercept,
            "coefficients": self.coefficients.tolist(),
            "interaction_pairs": [list(p) for p in self.pairs],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LinearPredictor":
        return cls(obj["coefficients"], obj["intercept"],
                   obj.get("interaction_pairs") or None, obj.get("name", "linear"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True, indent=1)


class OLSPredictor(LinearPredictor):
    """Least-squares fit; ``collinear`` is set when the ridge fallback activated."""

    def __init__(self, coefficients, intercept, pairs, collinear: bool, name: str = "ols"):
        super().__init__(coefficients, intercept, pairs, name)
        self.collinear = bool(collinear)


class KnnPredictor(Predictor):
    """Mean target of the k nearest training rows under standardized Euclidean
    distance; distance ties are broken by training-row index."""

    name = "knn"

    def __init__(self, train_features: np.ndarray, train_target: np.ndarray, k: int):
        self._X = np.asarray(train_features, dtype=float)
        self._y = np.asarray(train_target, dtype=float)
        self.k = int(k)
        self.n_features = self._X.shape[1]
        self._mu = self._X.mean(axis=0)
        sd = self._X.std(axis=0, ddof=1)
        self._sd = np.where(sd > 0, sd, 1.0)
        self._Z = (self._X - self._mu) / self._sd
        self.name = f"knn:{self.k}"

    def predict(self, X: np.ndarray) -> np.ndarray:
        Z = (np.asarray(X, dtype=float) - self._mu) / self._sd
        out = np.empty(Z.shape[0])
        # chunked to bound the (chunk x n_train) distance matrix
        step = max(1, int(2_000_000 // max(1, self._Z.shape[0])))
        for lo in range(0, Z.shape[0], step):
            hi = min(lo + step, Z.shape[0])
            d2 = ((Z[lo:hi, None, :] - self._Z[None, :, :]) ** 2).sum(axis=2)
            idx = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            out[lo:hi] = self._y[idx].mean(axis=1)
        return out


@dataclass(frozen=True)
class FitReport:
    """Goodness-of-fit summary (held-out when a test split is given)."""

    r2: float
    mse: float
    mad: float
    n_train: int
    n_test: int


def _fit_report(pred: Predictor, train: Dataset, test: Dataset | None) -> FitReport:
    ev = test if test is not None else train
    yhat = pred(ev.features)
    resid = ev.target - yhat
    mse = float(np.mean(resid**2))
    mad = float(np.mean(np.abs(resid)))
    denom = float(np.sum((ev.target - ev.target.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / denom if denom > 0 else 1.0
    return FitReport(r2=r2, mse=mse, mad=mad, n_train=train.n,
                     n_test=ev.n if test is not None else 0)


_RIDGE_FALLBACK = 1e-8


def _solve_ls(A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, bool]:
    """Least squares via SVD; rank-deficient designs fall back to a small ridge."""
    beta, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank == A.shape[1]:
        return beta, False
    gram = A.T @ A + _RIDGE_FALLBACK * np.eye(A.shape[1])
    return np.linalg.solve(gram, A.T @ y), True


def fit_ols(train: Dataset, interactions: bool = False,
            test: Dataset | None = None) -> tuple[OLSPredictor, FitReport]:
    """Least-squares regression of the target on the features.

    With ``interactions=True`` the design is expanded with all pairwise
    products (no squared terms).  Collinear designs are resolved with a
    ridge fallback (lambda = 1e-8) and flagged on the returned predictor.
    """
    pairs = _interaction_pairs(train.d) if interactions else []
    design = _expand(train.features, pairs)
    n_regressors = design.shape[1] + 1
    if train.n <= n_regressors:
        raise InsufficientRows(f"{train.n} rows for {n_regressors} regressors")
    A = np.hstack([np.ones((train.n, 1)), design])
    beta, collinear = _solve_ls(A, train.target)
    pred = OLSPredictor(beta[1:], beta[0], pairs, collinear,
                        name="ols:interactions" if interactions else "ols")
    return pred, _fit_report(pred, train, test)


def fit_knn(train: Dataset, k: int, test: Dataset | None = None) -> tuple[KnnPredictor, FitReport]:
    """k-nearest-neighbour regression on standardized features."""
    if not 1 <= k <= train.n:
        raise InvalidK(f"k={k} outside [1, {train.n}]")
    pred = KnnPredictor(train.features, train.target, k)
    return pred, _fit_report(pred, train, test)


_EXPRESSIONS: dict = {}


def register_expression(expression_id: str, factory) -> None:
    """Register an analytic form under ``expression_id`` for
    :func:`exact_function_predictor`."""
    _EXPRESSIONS[expression_id] = factory


def exact_function_predictor(expression: str, **params) -> Predictor:
    """Predictor evaluating a registered analytic function exactly (no noise)."""
    if expression not in _EXPRESSIONS:
        # synth registers its benchmark forms on import
        from . import synth  # noqa: F401
    if expression not in _EXPRESSIONS:
        raise UnknownExpression(
            f"{expression!r}; known: {sorted(_EXPRESSIONS)}")
    return _EXPRESSIONS[expression](**params)


register_expression(
    "linear",
    lambda beta, intercept=0.0: LinearPredictor(beta, intercept, name="exact:linear"),
)
register_expression(
    "constant",
    lambda value=0.0, d=1: LinearPredictor(np.zeros(d), value, name="exact:constant"),
)
