"""Seeing extrapolation directly: prediction densities before and after.

A regression with interaction terms is fitted to data whose first two
features are strongly coupled.  Freely permuting one of them feeds the
model impossible combinations, and the prediction distribution grows a
tail far outside anything observed; restricting the permutation (GCMR)
curtails it.  The tail mass quantifies the share of predictions that left
the original prediction range.

Run: python demos/04_density_diagnostic.py
"""

import numpy as np

from permsafe import (
    Dataset,
    HookerSpec,
    density_diagnostic,
    fit_ols,
    sample_hooker,
)

rng = np.random.default_rng(3)
pair = sample_hooker(HookerSpec(coefficients=(1.0, 1.0), rho=0.95,
                                noise_sd=0.0, n=1500), seed=3)
third = rng.uniform(size=1500)
features = np.column_stack([pair.features, third])
y = 3.0 * features[:, 0] - 2.0 * features[:, 0] * features[:, 1] \
    + features[:, 2] + 0.05 * rng.standard_normal(1500)
ds = Dataset(features, ("x1", "x2", "x3"), y, "y")

model, report = fit_ols(ds, interactions=True)
print(f"fitted interaction model: R^2 = {report.r2:.3f}, MSE = {report.mse:.4f}")

for strategy in ("gcmr", "gknock"):
    diag = density_diagnostic(model, ds, 0, strategy, seed=7, bins=40)
    print(f"\npermuting x1, restricted strategy = {strategy}:")
    print(f"  tail mass, free permutation: {diag.tail_mass_unrestricted:.4f}")
    print(f"  tail mass, restricted:       {diag.tail_mass_restricted:.4f}")

diag = density_diagnostic(model, ds, 0, "gcmr", seed=7, bins=12)
lo = diag.bin_edges[:-1]
width = max(diag.hist_unrestricted.max(), diag.hist_original.max())
print("\nprediction histogram (o = original, f = free, r = restricted):")
for i in range(12):
    bars = ""
    for tag, h in (("o", diag.hist_original), ("f", diag.hist_unrestricted),
                   ("r", diag.hist_restricted)):
        n = int(round(30 * h[i] / width)) if width > 0 else 0
        bars += f" {tag}|{'#' * n:<30}"
    print(f"  {lo[i]:>7.2f} {bars}")
print("\nThe free permutation piles mass into bins no original prediction")
print("ever reached; those are exactly the extrapolated evaluations.")
