"""Ground truth versus estimators on the 10-feature linear benchmark.

The benchmark has known per-feature importances (twice the conditional total
index).  At rho = 0 everything agrees with the closed form beta^2/6.  At
rho = 0.9 the unrestricted measure keeps reporting the independent-case
values for the coupled pair (X1, X2) because it ignores the dependence,
while GCMR and GKnock track the much smaller conditional ground truth.

Run: python demos/02_hooker_benchmark.py
"""


from permsafe import (
    HookerSpec,
    RunConfig,
    analytic_ground_truth_independent,
    exact_function_predictor,
    oracle_ground_truth,
    run_all,
    sample_hooker,
)

g = exact_function_predictor("hooker")
cfg = RunConfig(measures=("nu", "nu_gcmr", "nu_gknock"), replicates=50,
                master_seed=7)


def table(rho, truth):
    ds = sample_hooker(HookerSpec(rho=rho, n=2000), seed=11)
    rep = run_all(g, ds, cfg)
    print(f"\nrho = {rho}:  (R = {cfg.replicates}, N = {ds.n})")
    print(f"{'feature':>8} {'truth':>8} {'nu':>8} {'nu_gcmr':>9} {'nu_gknock':>10}")
    for j, name in enumerate(ds.column_names):
        print(f"{name:>8} {truth[j]:>8.4f} "
              f"{rep.measures['nu'].mean[j]:>8.4f} "
              f"{rep.measures['nu_gcmr'].mean[j]:>9.4f} "
              f"{rep.measures['nu_gknock'].mean[j]:>10.4f}")
    return rep


truth0 = analytic_ground_truth_independent(HookerSpec(rho=0.0)).values
table(0.0, truth0)

print("\ncomputing the conditional ground truth for rho = 0.9 "
      "(double-loop Monte Carlo oracle)...")
truth9 = oracle_ground_truth(HookerSpec(rho=0.9), outer=2000, inner=2000,
                             seed=11).values
rep9 = table(0.9, truth9)

nu = rep9.measures["nu"].mean
gcmr = rep9.measures["nu_gcmr"].mean
print(f"\nFor the coupled pair the unrestricted measure stays near "
      f"{nu[0]:.3f} (the independent-case value)")
print(f"while the conditional ground truth is {truth9[0]:.4f}; the "
      f"restricted estimates {gcmr[0]:.4f} / {gcmr[1]:.4f} recover it.")
