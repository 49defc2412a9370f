"""Permutation feature importance without extrapolation.

Importance measures for black-box regression models whose permuted
evaluation points never leave the support of the data: residual
permutation after a rank-based Gaussian transform (GCMR), Gaussian
knockoffs in score space (GKnock), and ALE-grid-based indices, next to
the classical unrestricted permutation importance and total-index
estimators they should be compared against.
"""

__version__ = "0.1.0"

from .dataset import (
    ColumnSummary,
    Dataset,
    SeedPolicy,
    empirical_cdf_values,
    load_csv,
    split_rows,
    summarize,
)
from .gauss import NormalScoreMap, NormalScores, fit_normal_score_map
from .gcmr import ConditionalModel, conditional_for_feature, fit_conditional, gcmr_permute
from .gknock import KnockoffModel, fit_knockoff_model, gknock_permute, sample_knockoffs
from .ale import (
    ALECurve,
    ALEGrid,
    LocalEffects,
    ale_curve,
    build_grid,
    extrapolation_radius,
    kappa_ale,
    local_effects,
    tau_ale,
)
from .models import (
    FitReport,
    KnnPredictor,
    LinearPredictor,
    OLSPredictor,
    Predictor,
    exact_function_predictor,
    fit_knn,
    fit_ols,
    register_expression,
)
from .engine import (
    MEASURES,
    STRATEGIES,
    DensityDiagnostic,
    ImportanceReport,
    LossFn,
    MeasureResult,
    RunConfig,
    conditional_tau,
    density_diagnostic,
    jansen_tau_prime,
    make_loss,
    nu_hat,
    replacement_column,
    run_all,
)
from .synth import (
    HOOKER_COEFFICIENTS,
    GroundTruth,
    HookerSpec,
    analytic_ground_truth_independent,
    oracle_ground_truth,
    sample_hooker,
)

__all__ = [
    "__version__",
    "ColumnSummary", "Dataset", "SeedPolicy", "empirical_cdf_values",
    "load_csv", "split_rows", "summarize",
    "NormalScoreMap", "NormalScores", "fit_normal_score_map",
    "ConditionalModel", "conditional_for_feature", "fit_conditional", "gcmr_permute",
    "KnockoffModel", "fit_knockoff_model", "gknock_permute", "sample_knockoffs",
    "ALECurve", "ALEGrid", "LocalEffects", "ale_curve", "build_grid",
    "extrapolation_radius", "kappa_ale", "local_effects", "tau_ale",
    "FitReport", "KnnPredictor", "LinearPredictor", "OLSPredictor", "Predictor",
    "exact_function_predictor", "fit_knn", "fit_ols", "register_expression",
    "MEASURES", "STRATEGIES", "DensityDiagnostic", "ImportanceReport", "LossFn",
    "MeasureResult", "RunConfig", "conditional_tau", "density_diagnostic",
    "jansen_tau_prime", "make_loss", "nu_hat", "replacement_column", "run_all",
    "HOOKER_COEFFICIENTS", "GroundTruth", "HookerSpec",
    "analytic_ground_truth_independent", "oracle_ground_truth", "sample_hooker",
]
