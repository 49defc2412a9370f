"""Gaussian knockoff sampling in normal-score space.

A second-order Gaussian knockoff model is fitted to the normal scores of
the whole dataset; sampling draws a joint knockoff matrix Z' with
cov(Z') = Sigma and cov(Z, Z') = Sigma - diag(s), and the inverse score
maps carry each column back to the original scale.  When scoring feature j
only column j of the knockoff matrix replaces the original data.

Two rules for the diagonal parameter s are provided:

``"ci"`` (default)
    s_k = 1 / (Sigma^-1)_kk, scaled down if infeasible.  With this choice
    each knockoff coordinate, conditionally on the data, is an exact redraw
    from N(E[Z_k | Z_-k], Var(Z_k | Z_-k)) -- the same conditional law the
    residual-permutation strategy targets, which makes the resulting
    importance estimates converge to twice the conditional total index.

``"equi"``
    the equicorrelated choice s_k = min(1, 2 lambda_min(corr)) mapped back
    to covariance scale.  Valid knockoffs, but a single strong correlation
    anywhere shrinks s globally and the per-feature conditional law is no
    longer a conditional redraw, so restricted importances of independent
    features are deflated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DegenerateColumn, NotPositiveDefinite
from .gauss import NormalScores

__all__ = ["KnockoffModel", "fit_knockoff_model", "sample_knockoffs", "gknock_permute"]

_EIGENVALUE_FLOOR = -1e-10


def _s_equicorrelated(sigma: np.ndarray) -> np.ndarray:
    std = np.sqrt(np.diag(sigma))
    corr = sigma / np.outer(std, std)
    lam_min = float(np.linalg.eigvalsh(corr).min())
    return np.minimum(1.0, 2.0 * lam_min) * std**2


def _s_conditional_independence(sigma: np.ndarray) -> np.ndarray:
    w = np.linalg.inv(sigma)
    s = 1.0 / np.diag(w)
    root = np.diag(np.sqrt(s))
    lam_max = float(np.linalg.eigvalsh(root @ w @ root).max())
    if lam_max > 2.0:
        s = s * (2.0 / lam_max) * (1.0 - 1e-9)
    return s


@dataclass(frozen=True)
class KnockoffModel:
    """Fitted second-order Gaussian knockoff parameters on the score scale.

    ``a`` is the row-convention conditional-mean operator
    ``I - Sigma^-1 diag(s)`` and ``cond_cov`` the conditional covariance
    ``2 diag(s) - diag(s) Sigma^-1 diag(s)``; ``noise_root`` satisfies
    ``noise_root @ noise_root.T = cond_cov``.
    """

    mu: np.ndarray
    sigma: np.ndarray
    s: np.ndarray
    a: np.ndarray
    cond_cov: np.ndarray
    noise_root: np.ndarray
    s_rule: str
    shrinkage: float

    @classmethod
    def from_covariance(cls, mu, sigma, s_rule: str = "ci", s=None,
                        shrinkage: float = 0.0) -> "KnockoffModel":
        mu = np.asarray(mu, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        d = sigma.shape[0]
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(
                "covariance not positive definite; raise the shrinkage") from None
        if s is None:
            if s_rule == "ci":
                s = _s_conditional_independence(sigma)
            elif s_rule == "equi":
                s = _s_equicorrelated(sigma)
            else:
                raise ValueError(f"unknown s_rule {s_rule!r}")
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise NotPositiveDefinite("negative knockoff diagonal s")
        S = np.diag(s)
        sigma_inv = np.linalg.inv(sigma)
        a = np.eye(d) - sigma_inv @ S
        cond_cov = 2.0 * S - S @ sigma_inv @ S
        cond_cov = 0.5 * (cond_cov + cond_cov.T)
        eigval, eigvec = np.linalg.eigh(cond_cov)
        if eigval.min() < _EIGENVALUE_FLOOR:
            raise NotPositiveDefinite(
                f"conditional covariance has eigenvalue {eigval.min():.3e}")
        noise_root = eigvec @ np.diag(np.sqrt(np.clip(eigval, 0.0, None)))
        return cls(mu, sigma, s, a, cond_cov, noise_root, s_rule, shrinkage)


def fit_knockoff_model(z: np.ndarray, shrinkage: float = 1e-3,
                       s_rule: str = "ci", s=None) -> KnockoffModel:
    """Fit the knockoff model to a score matrix.

    The sample covariance is shrunk toward the identity,
    ``(1 - shrinkage) * cov + shrinkage * I``, before inversion; pass ``s``
    to override the diagonal rule (e.g. to force s = 0).
    """
    z = np.asarray(z, dtype=float)
    n, d = z.shape
    if d < 2:
        raise ValueError("need at least 2 features for knockoffs")
    cov = np.cov(z, rowvar=False)
    sigma = (1.0 - shrinkage) * cov + shrinkage * np.eye(d)
    return KnockoffModel.from_covariance(z.mean(axis=0), sigma, s_rule=s_rule,
                                         s=s, shrinkage=shrinkage)


def sample_knockoffs(model: KnockoffModel, z: np.ndarray, seed) -> np.ndarray:
    """Draw one knockoff matrix Z' for the rows of ``z``, deterministically
    under ``seed``.

    Per row, Z' = mu + A^T (z - mu) + noise with noise covariance
    ``cond_cov``; the update is applied as ``z + (z - mu)(A - I)`` so the
    degenerate s = 0 model reproduces z exactly.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = np.asarray(z, dtype=float)
    eps = rng.standard_normal(z.shape)
    return z + (z - model.mu) @ (model.a - np.eye(z.shape[1])) + eps @ model.noise_root.T


def gknock_permute(ds: Dataset, j: int, seed, s_rule: str = "ci",
                   shrinkage: float = 1e-3, scores: NormalScores | None = None,
                   model: KnockoffModel | None = None,
                   knockoff_z: np.ndarray | None = None) -> np.ndarray:
    """Knockoff replacement column for feature ``j`` on the original scale.

    One knockoff matrix is drawn for the whole dataset per seed; calls with
    the same seed but different ``j`` therefore share the joint draw, as the
    knockoff framework prescribes.  ``scores``, ``model`` and ``knockoff_z``
    allow callers to reuse work across features and replicates.
    """
    if scores is None:
        scores = NormalScores.fit(ds)
    if scores.maps[j] is None:
        raise DegenerateColumn(f"feature {j} is constant")
    active = scores.active
    if knockoff_z is None:
        zact = scores.z[:, active]
        if model is None:
            model = fit_knockoff_model(zact, shrinkage=shrinkage, s_rule=s_rule)
        knockoff_z = sample_knockoffs(model, zact, seed)
    j_act = int(np.searchsorted(active, j))
    return scores.inverse_column(j, knockoff_z[:, j_act])
