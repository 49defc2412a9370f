"""Synthetic benchmarks with known ground truth.

The Hooker benchmark is a 10-feature linear form with uniform marginals, an
optional Gaussian-copula correlation between the first two features and
additive Gaussian noise.  Ground-truth total-index values come from two
independent routes: a closed form for the independent case and a double-loop
Monte Carlo oracle with exact conditional sampling in score space for any
correlation.  The oracle is deliberately brute force so it can vouch for the
fast estimators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .dataset import Dataset, SeedPolicy
from .errors import RhoNotZero
from .models import LinearPredictor, register_expression

__all__ = [
    "HOOKER_COEFFICIENTS",
    "HookerSpec",
    "GroundTruth",
    "sample_hooker",
    "analytic_ground_truth_independent",
    "oracle_ground_truth",
]

HOOKER_COEFFICIENTS = (1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.5, 0.8, 1.2, 1.5)


@dataclass(frozen=True)
class HookerSpec:
    """Linear benchmark y = sum(beta_j x_j) + eps with U[0,1] marginals and a
    Gaussian-copula coupling of strength ``rho`` between features 1 and 2."""

    coefficients: tuple[float, ...] = HOOKER_COEFFICIENTS
    rho: float = 0.0
    noise_sd: float = 0.1
    n: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(b) for b in self.coefficients))
        if not abs(self.rho) < 1.0:
            raise ValueError("rho must satisfy |rho| < 1")
        if self.noise_sd < 0.0:
            raise ValueError("noise_sd must be >= 0")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if len(self.coefficients) < 2:
            raise ValueError("need at least 2 coefficients")

    @property
    def d(self) -> int:
        return len(self.coefficients)

    def predictor(self) -> LinearPredictor:
        """The noise-free data-generating function as an exact predictor."""
        return LinearPredictor(self.coefficients, name="exact:hooker")

    def to_dict(self) -> dict:
        return {"coefficients": list(self.coefficients), "rho": self.rho,
                "noise_sd": self.noise_sd, "n": self.n}


register_expression(
    "hooker",
    lambda coefficients=HOOKER_COEFFICIENTS:
        LinearPredictor(coefficients, name="exact:hooker"),
)


@dataclass(frozen=True)
class GroundTruth:
    """Per-feature true loss-increase values (twice the conditional total
    index) together with their provenance."""

    values: np.ndarray
    provenance: str
    oracle_outer: int | None = None
    oracle_inner: int | None = None
    oracle_seed: int | None = None

    def to_dict(self) -> dict:
        out = {"values": [float(v) for v in self.values], "provenance": self.provenance}
        if self.provenance == "oracle-mc":
            out["oracle"] = {"outer": self.oracle_outer, "inner": self.oracle_inner,
                             "seed": self.oracle_seed}
        return out


def sample_hooker(spec: HookerSpec, seed: int) -> Dataset:
    """Draw a dataset from the benchmark, deterministically under ``seed``.

    The copula pair is built by correlating two standard normals and pushing
    each through the normal CDF, which leaves both marginals exactly uniform.
    """
    policy = SeedPolicy(seed)
    d = spec.d
    x = policy.rng("hooker:uniforms").uniform(size=(spec.n, d))
    zpair = policy.rng("hooker:copula").standard_normal((spec.n, 2))
    z2 = spec.rho * zpair[:, 0] + np.sqrt(1.0 - spec.rho**2) * zpair[:, 1]
    x[:, 0] = ndtr(zpair[:, 0])
    x[:, 1] = ndtr(z2)
    y = x @ np.asarray(spec.coefficients)
    if spec.noise_sd > 0:
        y = y + spec.noise_sd * policy.rng("hooker:noise").standard_normal(spec.n)
    names = tuple(f"X{j + 1}" for j in range(d))
    return Dataset(x, names, y, "y")


def analytic_ground_truth_independent(spec: HookerSpec) -> GroundTruth:
    """Closed form for rho = 0: each feature contributes beta^2 / 6 (twice
    the coefficient-squared times the uniform variance)."""
    if spec.rho != 0.0:
        raise RhoNotZero("closed form only valid for rho = 0")
    beta = np.asarray(spec.coefficients)
    return GroundTruth(beta**2 / 6.0, "analytic")


def _conditional_feature_draws(spec: HookerSpec, x_block: np.ndarray, j: int,
                               inner: int, rng: np.random.Generator) -> np.ndarray:
    """inner redraws of feature j given the other columns of each row.

    Only the copula pair is dependent: given the partner's score z, the
    conditional score is N(rho z, 1 - rho^2); every other feature is an
    independent uniform.
    """
    m = x_block.shape[0]
    if j in (0, 1) and spec.rho != 0.0:
        partner = 1 - j
        z_partner = ndtri(x_block[:, partner])[:, None]
        z = spec.rho * z_partner + np.sqrt(1.0 - spec.rho**2) * rng.standard_normal((m, inner))
        return ndtr(z)
    return rng.uniform(size=(m, inner))


def oracle_ground_truth(spec: HookerSpec, outer: int, inner: int, seed: int) -> GroundTruth:
    """Double-loop Monte Carlo of the conditional total index, times two.

    For each of ``outer`` joint draws, ``inner`` conditional redraws of each
    feature are averaged through half the squared difference of the
    noise-free function values.  Deterministic under ``seed``.
    """
    if outer < 100 or inner < 100:
        raise ValueError("outer and inner must both be >= 100")
    policy = SeedPolicy(seed)
    g = spec.predictor()
    d = spec.d
    x = sample_hooker(
        HookerSpec(spec.coefficients, spec.rho, 0.0, outer),
        policy.child_seed("oracle:data")).features
    gx = g(x)
    values = np.zeros(d)
    chunk = max(1, 2_000_000 // max(1, inner * d))
    for j in range(d):
        rng = policy.rng("oracle:redraw", j)
        acc = 0.0
        for lo in range(0, outer, chunk):
            hi = min(lo + chunk, outer)
            block = x[lo:hi]
            xj = _conditional_feature_draws(spec, block, j, inner, rng)
            pts = np.repeat(block[:, None, :], inner, axis=1)
            pts[:, :, j] = xj
            diff = g(pts.reshape(-1, d)).reshape(hi - lo, inner) - gx[lo:hi, None]
            acc += float(np.sum(diff**2)) / inner
        values[j] = acc / outer  # = 2 * (1/2 E[(g' - g)^2])
    return GroundTruth(values, "oracle-mc", outer, inner, seed)
