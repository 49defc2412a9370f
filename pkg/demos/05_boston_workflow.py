"""Real-data workflow: importance of the Boston Housing features.

A linear regression with pairwise interaction terms fits this dataset well
(R^2 about 0.92) but its interaction surface explodes when fed feature
combinations that never occur: freely permuting ZN (large-lot zoning, zero
in most towns) assigns it an enormous importance. Restricting the
permutation tells a different story: ZN's unique information is worth
little, and the accessibility/tax variables RAD and TAX carry the load.

Run: python demos/05_boston_workflow.py
"""

import os

import numpy as np

from permsafe import RunConfig, density_diagnostic, fit_ols, load_csv, run_all

path = os.environ.get(
    "PERMSAFE_BOSTON_CSV",
    os.path.join(os.path.dirname(__file__), "..", "tests", "data",
                 "boston_housing.csv"))
ds = load_csv(path, "MEDV")
model, report = fit_ols(ds, interactions=True)
print(f"{ds.n} rows, {ds.d} features; interaction OLS R^2 = {report.r2:.3f}")

cfg = RunConfig(measures=("nu", "nu_gcmr", "nu_gknock"), replicates=50,
                master_seed=9)
rep = run_all(model, ds, cfg)
nu = rep.measures["nu"].mean
gcmr = rep.measures["nu_gcmr"].mean
gknock = rep.measures["nu_gknock"].mean
ranks = rep.ranking("nu_gcmr")

print(f"\n{'feature':>8} {'nu (free)':>10} {'nu_gcmr':>9} {'nu_gknock':>10} "
      f"{'gcmr rank':>10}")
for j in np.argsort(-nu):
    print(f"{ds.column_names[j]:>8} {nu[j]:>10.1f} {gcmr[j]:>9.1f} "
          f"{gknock[j]:>10.1f} {ranks[j]:>10}")

zn = ds.feature_index("ZN")
diag = density_diagnostic(model, ds, zn, "gcmr", seed=9)
print(f"\nZN prediction tail mass (share outside the original prediction "
      f"range):")
print(f"  free permutation: {diag.tail_mass_unrestricted:.4f}")
print(f"  GCMR restricted:  {diag.tail_mass_restricted:.4f}")
print("\nThe free permutation makes ZN look like the dominant feature purely")
print("through extrapolated predictions; once permutations respect the")
print("dependence structure, RAD and TAX top the ranking instead.")
