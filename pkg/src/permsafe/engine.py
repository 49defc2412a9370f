"""Permutation-importance estimators, replication and aggregation.

The baseline measure is the increase in average loss when one feature
column is replaced by a permuted copy.  Three replacement strategies are
supported: an unrestricted uniform permutation, the residual-permutation
strategy (GCMR) and Gaussian knockoffs (GKnock), both of which keep the new
points inside the data cloud.  The Jansen-style quadratic forms estimate
the corresponding total indices directly from prediction differences; with
quadratic loss and targets equal to the model's own predictions the two
families coincide exactly (nu = 2 tau), which the implementation preserves
at machine precision by reusing one permuted column per replicate.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .ale import build_grid, kappa_ale, local_effects, tau_ale
from .dataset import Dataset, SeedPolicy
from .errors import PermsafeError
from .gauss import NormalScores
from .gcmr import conditional_for_feature, gcmr_permute
from .gknock import fit_knockoff_model, gknock_permute, sample_knockoffs
from .models import Predictor

__all__ = [
    "LossFn",
    "make_loss",
    "STRATEGIES",
    "MEASURES",
    "replacement_column",
    "nu_hat",
    "jansen_tau_prime",
    "conditional_tau",
    "RunConfig",
    "MeasureResult",
    "ImportanceReport",
    "run_all",
    "DensityDiagnostic",
    "density_diagnostic",
]

STRATEGIES = ("unrestricted", "gcmr", "gknock")
MEASURES = ("nu", "nu_gcmr", "nu_gknock", "tau_prime", "tau_ale", "kappa_ale")

_PERM_MEASURES = {
    "nu": "unrestricted",
    "nu_gcmr": "gcmr",
    "nu_gknock": "gknock",
    "tau_prime": "unrestricted",
}


@dataclass(frozen=True)
class LossFn:
    """Pointwise loss with L(a, a) = 0."""

    kind: str

    def __call__(self, y: np.ndarray, yhat: np.ndarray) -> np.ndarray:
        if self.kind == "quadratic":
            return (y - yhat) ** 2
        return np.abs(y - yhat)


def make_loss(kind: str = "quadratic") -> LossFn:
    if kind not in ("quadratic", "absolute"):
        raise ValueError(f"unknown loss kind {kind!r}")
    return LossFn(kind)


def replacement_column(ds: Dataset, j: int, strategy: str, seed, *,
                       regression: str = "linear", s_rule: str = "ci",
                       shrinkage: float = 1e-3, scores: NormalScores | None = None,
                       conditional=None, knockoff_model=None,
                       knockoff_z=None) -> np.ndarray:
    """Produce the permuted column X'_j for one strategy.

    All estimators draw their replacement through this single function so
    that measures sharing a (strategy, seed) pair operate on the identical
    permuted sample.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if strategy == "unrestricted":
        return ds.column(j)[rng.permutation(ds.n)]
    if strategy == "gcmr":
        return gcmr_permute(ds, j, rng, kind=regression, scores=scores,
                            conditional=conditional)
    if strategy == "gknock":
        return gknock_permute(ds, j, rng, s_rule=s_rule, shrinkage=shrinkage,
                              scores=scores, model=knockoff_model,
                              knockoff_z=knockoff_z)
    raise ValueError(f"unknown strategy {strategy!r}")


def _perm_loss_value(model, ds, j, column, loss, baseline_mean_loss):
    permuted = model(ds.replace_feature(j, column))
    return float(np.mean(loss(ds.target, permuted))) - baseline_mean_loss


def nu_hat(model: Predictor, ds: Dataset, j: int, strategy: str = "unrestricted",
           loss: LossFn | str = "quadratic", seed=0, **context) -> float:
    """Loss increase after replacing feature ``j`` by the strategy's column.

    Degenerate (constant) features return exactly 0.
    """
    if isinstance(loss, str):
        loss = make_loss(loss)
    if np.unique(ds.column(j)).size < 2:
        return 0.0
    column = replacement_column(ds, j, strategy, seed, **context)
    base = float(np.mean(loss(ds.target, model(ds.features))))
    return _perm_loss_value(model, ds, j, column, loss, base)


def _jansen_value(model, ds, j, column, baseline_pred):
    permuted = model(ds.replace_feature(j, column))
    return 0.5 * float(np.mean((permuted - baseline_pred) ** 2))


def jansen_tau_prime(model: Predictor, ds: Dataset, j: int, seed=0, **context) -> float:
    """Half the mean squared prediction difference under a marginal redraw
    (uniform permutation) of feature ``j``."""
    if np.unique(ds.column(j)).size < 2:
        return 0.0
    column = replacement_column(ds, j, "unrestricted", seed, **context)
    return _jansen_value(model, ds, j, column, model(ds.features))


def conditional_tau(model: Predictor, ds: Dataset, j: int, strategy: str = "gcmr",
                    seed=0, **context) -> float:
    """Same quadratic form with the replacement drawn by a restricted
    strategy; estimates the conditional total index."""
    if strategy not in ("gcmr", "gknock"):
        raise ValueError("conditional_tau needs a restricted strategy")
    if np.unique(ds.column(j)).size < 2:
        return 0.0
    column = replacement_column(ds, j, strategy, seed, **context)
    return _jansen_value(model, ds, j, column, model(ds.features))


@dataclass(frozen=True)
class RunConfig:
    """Everything a replicated importance run depends on; recorded verbatim
    in every report so outputs are reconstructible."""

    measures: tuple[str, ...] = ("nu",)
    replicates: int = 50
    k: int = 10
    grid_kind: str = "quantile"
    loss: str = "quadratic"
    regression: str = "linear"
    s_rule: str = "ci"
    shrinkage: float = 1e-3
    master_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(self.measures))
        if not self.measures:
            raise ValueError("measures must be nonempty")
        unknown = [m for m in self.measures if m not in MEASURES]
        if unknown:
            raise ValueError(f"unknown measures {unknown}; choose from {MEASURES}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        make_loss(self.loss)

    def to_dict(self) -> dict:
        return {
            "measures": list(self.measures),
            "replicates": self.replicates,
            "k": self.k,
            "grid_kind": self.grid_kind,
            "loss": self.loss,
            "regression": self.regression,
            "s_rule": self.s_rule,
            "shrinkage": self.shrinkage,
            "master_seed": self.master_seed,
            "threads": self.threads,
        }


@dataclass(frozen=True)
class MeasureResult:
    mean: np.ndarray
    sd: np.ndarray
    replicates: int


@dataclass(frozen=True)
class ImportanceReport:
    """Per-feature replicate means and standard deviations for each measure,
    with per-feature flags and the full run configuration."""

    feature_names: tuple[str, ...]
    target_name: str
    measures: dict
    flags: tuple[tuple[str, ...], ...]
    config: dict
    version: str = __version__

    def ranking(self, measure: str) -> np.ndarray:
        """Dense ranks of the measure means, 1 = most important; ties broken
        by feature index."""
        mean = self.measures[measure].mean
        order = sorted(range(mean.size), key=lambda j: (-mean[j], j))
        ranks = np.empty(mean.size, dtype=int)
        for pos, j in enumerate(order, start=1):
            ranks[j] = pos
        return ranks

    def to_json_dict(self) -> dict:
        feats = []
        for j, name in enumerate(self.feature_names):
            entry = {
                "name": name,
                "measures": {
                    m: {"mean": float(r.mean[j]), "sd": float(r.sd[j]),
                        "replicates": r.replicates}
                    for m, r in sorted(self.measures.items())
                },
                "flags": list(self.flags[j]),
            }
            feats.append(entry)
        return {
            "meta": {"config": self.config, "target": self.target_name,
                     "version": self.version},
            "features": feats,
        }

    def csv_rows(self):
        """One (feature, measure, mean, sd, replicates) row per pair."""
        rows = []
        for j, name in enumerate(self.feature_names):
            for m in sorted(self.measures):
                r = self.measures[m]
                rows.append((name, m, float(r.mean[j]), float(r.sd[j]), r.replicates))
        return rows


@dataclass
class _Workspace:
    """Shared fitted objects for one (dataset, config) run."""

    ds: Dataset
    config: RunConfig
    scores: NormalScores | None = None
    conditionals: dict = field(default_factory=dict)
    knockoff_model: object = None
    knockoff_draws: dict = field(default_factory=dict)

    def need_scores(self) -> NormalScores:
        if self.scores is None:
            self.scores = NormalScores.fit(self.ds)
        return self.scores

    def conditional(self, j: int):
        if j not in self.conditionals:
            self.conditionals[j] = conditional_for_feature(
                self.need_scores(), j, kind=self.config.regression)
        return self.conditionals[j]

    def knockoffs_for_replicate(self, r: int, policy: SeedPolicy) -> np.ndarray:
        if r not in self.knockoff_draws:
            scores = self.need_scores()
            zact = scores.z[:, scores.active]
            if self.knockoff_model is None:
                self.knockoff_model = fit_knockoff_model(
                    zact, shrinkage=self.config.shrinkage, s_rule=self.config.s_rule)
            self.knockoff_draws[r] = sample_knockoffs(
                self.knockoff_model, zact, policy.rng("perm:gknock", -1, r))
        return self.knockoff_draws[r]


def _permutation_task(model, ws, loss, baseline_pred, base_loss_mean,
                      measure, j, r, policy):
    """One (measure, feature, replicate) cell; pure given its child seed."""
    ds, cfg = ws.ds, ws.config
    strategy = _PERM_MEASURES[measure]
    if strategy == "gknock":
        kz = ws.knockoffs_for_replicate(r, policy)
        column = replacement_column(
            ds, j, "gknock", 0, scores=ws.scores, knockoff_z=kz)
    else:
        rng = policy.rng(f"perm:{strategy}", j, r)
        column = replacement_column(
            ds, j, strategy, rng, regression=cfg.regression,
            scores=ws.scores if strategy == "gcmr" else None,
            conditional=ws.conditional(j) if strategy == "gcmr" else None)
    if measure == "tau_prime":
        return _jansen_value(model, ds, j, column, baseline_pred)
    return _perm_loss_value(model, ds, j, column, loss, base_loss_mean)


def run_all(model: Predictor, ds: Dataset, config: RunConfig) -> ImportanceReport:
    """Run every requested measure for every feature across the configured
    replicates with derived child seeds.

    A failing feature is flagged (value pinned to 0) instead of aborting the
    run; results are bit-identical for a given config regardless of thread
    count because every cell derives its own random stream.
    """
    policy = SeedPolicy(config.master_seed)
    loss = make_loss(config.loss)
    ws = _Workspace(ds, config)
    d, R = ds.d, config.replicates

    degenerate = [np.unique(ds.column(j)).size < 2 for j in range(d)]
    flags: list[list[str]] = [[] for _ in range(d)]
    for j in range(d):
        if degenerate[j]:
            flags[j].append("degenerate")

    baseline_pred = model(ds.features)
    base_loss_mean = float(np.mean(loss(ds.target, baseline_pred)))

    perm_measures = [m for m in config.measures if m in _PERM_MEASURES]
    ale_measures = [m for m in config.measures if m in ("tau_ale", "kappa_ale")]

    # prefit shared objects serially so worker tasks are read-only
    if any(_PERM_MEASURES.get(m) in ("gcmr", "gknock") for m in perm_measures):
        ws.need_scores()
    if "nu_gcmr" in perm_measures:
        for j in range(d):
            if not degenerate[j]:
                cond = ws.conditional(j)
                if cond is not None and cond.collinear and "collinear" not in flags[j]:
                    flags[j].append("collinear")
    gknock_failed = None
    if "nu_gknock" in perm_measures:
        try:
            for r in range(R):
                ws.knockoffs_for_replicate(r, policy)
        except PermsafeError as exc:
            # dataset-level failure: keep the run alive, flag every feature
            gknock_failed = f"error:{type(exc).__name__}"
            for j in range(d):
                if not degenerate[j]:
                    flags[j].append(gknock_failed)

    values = {m: np.zeros((d, R)) for m in perm_measures}
    errors: dict = {}

    def run_cell(measure, j, r):
        try:
            values[measure][j, r] = _permutation_task(
                model, ws, loss, baseline_pred, base_loss_mean, measure, j, r, policy)
        except PermsafeError as exc:
            errors[(measure, j)] = type(exc).__name__

    cells = [(m, j, r) for m in perm_measures
             if not (m == "nu_gknock" and gknock_failed)
             for j in range(d) if not degenerate[j] for r in range(R)]
    if config.threads > 1 and model.concurrent_safe and cells:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(lambda c: run_cell(*c), cells))
    else:
        for c in cells:
            run_cell(*c)

    results: dict = {}
    for m in perm_measures:
        vals = values[m]
        for (measure, j), name in errors.items():
            if measure == m:
                vals[j, :] = 0.0
                tag = f"error:{name}"
                if tag not in flags[j]:
                    flags[j].append(tag)
        sd = vals.std(axis=1, ddof=1) if R > 1 else np.zeros(d)
        results[m] = MeasureResult(vals.mean(axis=1), sd, R)

    if ale_measures:
        ale_means = {m: np.zeros(d) for m in ale_measures}

        def flag(j, exc):
            tag = f"error:{type(exc).__name__}"
            if tag not in flags[j]:
                flags[j].append(tag)

        for j in range(d):
            if degenerate[j]:
                continue
            try:
                grid = build_grid(ds, j, config.k, config.grid_kind)
                effects = local_effects(model, ds, grid)
            except PermsafeError as exc:
                flag(j, exc)
                continue
            if grid.merged:
                flags[j].append("merged-bins")
            for m in ale_measures:
                fn = tau_ale if m == "tau_ale" else kappa_ale
                try:
                    ale_means[m][j] = fn(model, ds, grid, effects)
                except PermsafeError as exc:
                    flag(j, exc)
        for m in ale_measures:
            results[m] = MeasureResult(ale_means[m], np.zeros(d), 1)

    return ImportanceReport(
        feature_names=ds.column_names,
        target_name=ds.target_name,
        measures=results,
        flags=tuple(tuple(f) for f in flags),
        config=config.to_dict(),
    )


@dataclass(frozen=True)
class DensityDiagnostic:
    """Prediction distributions before and after permutation on shared bins.

    Histograms are probability masses (each sums to 1); the tail masses are
    the fractions of permuted predictions falling outside the [min, max]
    range of the original predictions.
    """

    feature_index: int
    strategy: str
    bin_edges: np.ndarray
    hist_original: np.ndarray
    hist_unrestricted: np.ndarray
    hist_restricted: np.ndarray
    tail_mass_unrestricted: float
    tail_mass_restricted: float

    def csv_rows(self):
        rows = []
        for i in range(self.bin_edges.size - 1):
            rows.append((float(self.bin_edges[i]), float(self.bin_edges[i + 1]),
                         float(self.hist_original[i]),
                         float(self.hist_unrestricted[i]),
                         float(self.hist_restricted[i])))
        return rows


def density_diagnostic(model: Predictor, ds: Dataset, j: int,
                       strategy: str = "gcmr", seed=0, bins: int = 50,
                       **context) -> DensityDiagnostic:
    """Compare prediction densities under free and restricted permutations."""
    if strategy not in ("gcmr", "gknock"):
        raise ValueError("restricted strategy must be gcmr or gknock")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    original = model(ds.features)
    free = model(ds.replace_feature(j, replacement_column(ds, j, "unrestricted", rng)))
    restricted = model(ds.replace_feature(
        j, replacement_column(ds, j, strategy, rng, **context)))

    lo = float(min(original.min(), free.min(), restricted.min()))
    hi = float(max(original.max(), free.max(), restricted.max()))
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    hist = lambda a: np.histogram(a, bins=edges)[0] / a.size
    o_lo, o_hi = float(original.min()), float(original.max())
    tail = lambda a: float(np.mean((a < o_lo) | (a > o_hi)))
    return DensityDiagnostic(
        feature_index=j,
        strategy=strategy,
        bin_edges=edges,
        hist_original=hist(original),
        hist_unrestricted=hist(free),
        hist_restricted=hist(restricted),
        tail_mass_unrestricted=tail(free),
        tail_mass_restricted=tail(restricted),
    )
