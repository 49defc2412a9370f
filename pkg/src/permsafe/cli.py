"""Command-line surface.

Subcommands: ``generate`` (synthetic benchmark data), ``truth`` (ground-truth
values), ``importance`` (replicated importance report), ``ale`` (curves and
grid sweeps), ``density`` (prediction-density diagnostic).  Every output file
embeds the full run configuration and tool version, carries no timestamps,
and is byte-identical across repeated runs with the same flags and seed.

Exit codes: 0 success, 2 usage/validation, 3 data or protocol mismatch,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .dataset import Dataset, SeedPolicy, load_csv
from .engine import (
    MEASURES,
    RunConfig,
    density_diagnostic,
    run_all,
)
from .errors import (
    DegenerateColumn,
    EmptyData,
    IndexOutOfRange,
    InsufficientRows,
    InvalidK,
    MissingTarget,
    NotPositiveDefinite,
    ParseError,
    PermsafeError,
    PredictorFailure,
    SingularDesign,
    UnknownExpression,
    ZeroTargetVariance,
)
from .ale import (
    ale_curve,
    build_grid,
    extrapolation_radius,
    kappa_ale,
    local_effects,
    tau_ale,
)
from .models import Predictor, exact_function_predictor, fit_knn, fit_ols
from .synth import (
    HookerSpec,
    analytic_ground_truth_independent,
    oracle_ground_truth,
    sample_hooker,
)

__all__ = ["main"]

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

_DATA_ERRORS = (MissingTarget, ParseError, EmptyData, IndexOutOfRange,
                InsufficientRows, InvalidK)
_NUMERICAL_ERRORS = (NotPositiveDefinite, ZeroTargetVariance, SingularDesign,
                     DegenerateColumn, PredictorFailure)


class UsageError(Exception):
    pass


class ProtocolError(Exception):
    pass


class QueriesWritten(Exception):
    """Phase one of the external-model protocol finished; not a failure."""


def _fmt(v) -> str:
    return repr(float(v))


def _write_text(path, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _meta_lines(config: dict) -> list[str]:
    return [
        f"# permsafe {__version__}",
        "# config: " + json.dumps(config, sort_keys=True),
    ]


def _csv_text(header: str, rows, config: dict) -> str:
    lines = _meta_lines(config) + [header]
    lines += [",".join(_fmt(c) if isinstance(c, float) else str(c) for c in row)
              for row in rows]
    return "\n".join(lines) + "\n"


def _json_text(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _density_seed(master: int, feature: int) -> int:
    return SeedPolicy(master).child_seed("density", feature)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PERMSAFE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"PERMSAFE_SEED must be an integer, got {env!r}")
    return 0


# ----------------------------------------------------------------- models

class RecordingPredictor(Predictor):
    """Phase-one stand-in: records every queried row, answers zero."""

    name = "recording"

    def __init__(self, n_features: int):
        self.n_features = n_features
        self.concurrent_safe = False
        self.queries: list[np.ndarray] = []

    def predict(self, X: np.ndarray) -> np.ndarray:
        self.queries.append(np.array(X, dtype=float))
        return np.zeros(X.shape[0])


class ReplayPredictor(Predictor):
    """Phase-two stand-in: answers the user-supplied predictions in query order."""

    name = "predictions"

    def __init__(self, n_features: int, predictions: np.ndarray):
        self.n_features = n_features
        self.concurrent_safe = False
        self._predictions = np.asarray(predictions, dtype=float)
        self._cursor = 0

    def predict(self, X: np.ndarray) -> np.ndarray:
        lo, hi = self._cursor, self._cursor + X.shape[0]
        if hi > self._predictions.size:
            raise ProtocolError("predictions file has fewer rows than queries")
        self._cursor = hi
        return self._predictions[lo:hi]

    def assert_consumed(self) -> None:
        if self._cursor != self._predictions.size:
            raise ProtocolError(
                f"consumed {self._cursor} of {self._predictions.size} predictions")


def _parse_model_spec(spec: str):
    """Split a model spec string into (kind, argument)."""
    kind, _, arg = spec.partition(":")
    if kind == "exact":
        if not arg:
            raise UsageError("exact model needs an id, e.g. exact:hooker")
        return "exact", arg
    if kind == "ols":
        if arg not in ("", "interactions"):
            raise UsageError(f"unknown ols variant {arg!r}")
        return "ols", arg == "interactions"
    if kind == "knn":
        try:
            return "knn", int(arg)
        except ValueError:
            raise UsageError(f"knn model needs an integer k, got {arg!r}") from None
    if kind == "predictions":
        if not arg:
            raise UsageError("predictions model needs a file path")
        return "predictions", arg
    raise UsageError(f"unknown model spec {spec!r}")


def _build_model(spec: str, ds: Dataset):
    kind, arg = _parse_model_spec(spec)
    if kind == "exact":
        try:
            return exact_function_predictor(arg)
        except UnknownExpression as exc:
            raise UsageError(str(exc)) from None
    if kind == "ols":
        return fit_ols(ds, interactions=arg)[0]
    if kind == "knn":
        return fit_knn(ds, arg)[0]
    raise AssertionError(kind)


# ------------------------------------------------- external-model protocol

def _queries_csv_text(ds: Dataset, queries: list[np.ndarray], config: dict) -> str:
    rows = np.vstack(queries) if queries else np.empty((0, ds.d))
    body = [",".join(_fmt(v) for v in row) for row in rows]
    lines = _meta_lines(config) + [",".join(ds.column_names)] + body
    return "\n".join(lines) + "\n"


def _read_predictions(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh
                 if ln.strip() and not ln.startswith("#")]
    if lines and lines[0].lower() in ("prediction", "predictions", "yhat"):
        lines = lines[1:]
    try:
        return np.array([float(ln.split(",")[-1]) for ln in lines])
    except ValueError as exc:
        raise ProtocolError(f"{path}: unparseable prediction line ({exc})") from None


def _run_with_external_model(workload, ds: Dataset, pred_path: str,
                             out_dir: str, config: dict):
    """Two-phase protocol: record queries, then replay user predictions.

    The query stream is fully determined by (data, flags, seed), so phase two
    regenerates it, checks it against the queries.csv on disk, and validates
    the prediction count before producing real outputs.
    """
    recorder = RecordingPredictor(ds.d)
    workload(recorder)
    text = _queries_csv_text(ds, recorder.queries, config)
    queries_path = os.path.join(out_dir, "queries.csv")

    if os.path.exists(queries_path):
        with open(queries_path, encoding="utf-8") as fh:
            on_disk = fh.read()
        if hashlib.sha256(on_disk.encode()).hexdigest() != \
                hashlib.sha256(text.encode()).hexdigest():
            raise ProtocolError(
                "queries.csv on disk does not match this run's flags/seed")
    if not os.path.exists(pred_path):
        _write_text(queries_path, text)
        n = sum(q.shape[0] for q in recorder.queries)
        print(f"wrote {queries_path} ({n} evaluation points); "
              f"supply predictions at {pred_path} and re-run")
        raise QueriesWritten()

    preds = _read_predictions(pred_path)
    n_queries = sum(q.shape[0] for q in recorder.queries)
    if preds.size != n_queries:
        raise ProtocolError(
            f"{pred_path}: {preds.size} predictions for {n_queries} queries")
    replay = ReplayPredictor(ds.d, preds)
    result = workload(replay)
    replay.assert_consumed()
    return result


# ------------------------------------------------------------ subcommands

def _cmd_generate(args) -> int:
    if not abs(args.rho) < 1.0:
        raise UsageError("rho must satisfy |rho| < 1")
    if args.n < 2:
        raise UsageError("n must be >= 2")
    if args.noise_sd < 0:
        raise UsageError("noise-sd must be >= 0")
    seed = _resolve_seed(args)
    spec = HookerSpec(rho=args.rho, noise_sd=args.noise_sd, n=args.n)
    config = {"command": "generate", "benchmark": "hooker", "seed": seed,
              **spec.to_dict()}
    ds = sample_hooker(spec, seed)

    header = ",".join(ds.column_names + (ds.target_name,))
    rows = [tuple(float(v) for v in row) + (float(t),)
            for row, t in zip(ds.features, ds.target)]
    _write_text(os.path.join(args.out, "data.csv"), _csv_text(header, rows, config))

    if args.rho == 0.0:
        truth = analytic_ground_truth_independent(spec)
    else:
        truth = oracle_ground_truth(spec, args.outer, args.inner, seed)
    doc = {"meta": {"config": config, "version": __version__},
           "spec": spec.to_dict(),
           "truth": truth.to_dict(),
           "features": list(ds.column_names)}
    _write_text(os.path.join(args.out, "truth.json"), _json_text(doc))
    print(f"wrote {args.out}/data.csv and {args.out}/truth.json")
    return 0


def _cmd_truth(args) -> int:
    if not abs(args.rho) < 1.0:
        raise UsageError("rho must satisfy |rho| < 1")
    seed = _resolve_seed(args)
    spec = HookerSpec(rho=args.rho)
    if args.rho == 0.0 and not args.force_oracle:
        truth = analytic_ground_truth_independent(spec)
    else:
        truth = oracle_ground_truth(spec, args.outer, args.inner, seed)
    doc = {"meta": {"config": {"command": "truth", "benchmark": "hooker",
                               "rho": args.rho, "seed": seed},
                    "version": __version__},
           "spec": spec.to_dict(), "truth": truth.to_dict()}
    text = _json_text(doc)
    if args.out:
        _write_text(args.out, text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _expand_measures(measures: list[str], strategies: list[str]) -> tuple[str, ...]:
    out = []
    for m in measures:
        if m == "nu":
            for s in strategies:
                key = {"unrestricted": "nu", "gcmr": "nu_gcmr",
                       "gknock": "nu_gknock"}.get(s)
                if key is None:
                    raise UsageError(f"unknown strategy {s!r}")
                if key not in out:
                    out.append(key)
        elif m in MEASURES:
            if m not in out:
                out.append(m)
        else:
            raise UsageError(f"unknown measure {m!r}; choose from {MEASURES}")
    if not out:
        raise UsageError("measures must be nonempty")
    return tuple(out)


def _load_dataset(args) -> Dataset:
    return load_csv(args.data, args.target, args.missing_policy)


def _cmd_importance(args) -> int:
    seed = _resolve_seed(args)
    ds = _load_dataset(args)
    measures = _expand_measures(
        [m.strip() for m in args.measures.split(",") if m.strip()],
        [s.strip() for s in args.strategies.split(",") if s.strip()])
    config = RunConfig(
        measures=measures, replicates=args.replicates, k=args.k,
        grid_kind=args.grid, loss=args.loss, regression=args.regression,
        s_rule=args.s_rule, shrinkage=args.shrinkage, master_seed=seed,
        threads=args.threads)
    density_feature = None
    if args.density is not None:
        density_feature = ds.feature_index(args.density)
    restricted = next((s for s in ("gcmr", "gknock")
                       if f"nu_{s}" in measures), "gcmr")

    file_config = {"command": "importance", "data": os.path.basename(args.data),
                   "target": args.target, "model": args.model,
                   "density": args.density, **config.to_dict()}
    # worker count never changes results, so it has no place in the
    # reproducibility record (outputs must match across --threads)
    file_config.pop("threads", None)

    def workload(model):
        report = run_all(model, ds, config)
        diag = None
        if density_feature is not None:
            diag = density_diagnostic(
                model, ds, density_feature, strategy=restricted,
                seed=_density_seed(seed, density_feature), bins=args.bins,
                regression=args.regression, s_rule=args.s_rule,
                shrinkage=args.shrinkage)
        return report, diag

    kind, arg = _parse_model_spec(args.model)
    if kind == "predictions":
        report, diag = _run_with_external_model(
            workload, ds, arg, args.out, file_config)
    else:
        report, diag = workload(_build_model(args.model, ds))

    doc = report.to_json_dict()
    doc["meta"]["config"] = file_config
    _write_text(os.path.join(args.out, "report.json"), _json_text(doc))
    _write_text(os.path.join(args.out, "report.csv"),
                _csv_text("feature,measure,mean,sd,replicates",
                          report.csv_rows(), file_config))
    written = ["report.json", "report.csv"]
    if diag is not None:
        name = f"density_{args.density}.csv"
        _write_text(os.path.join(args.out, name), _density_csv(diag, file_config))
        written.append(name)
    print(f"wrote {', '.join(written)} in {args.out}")
    return 0


def _density_csv(diag, config: dict) -> str:
    header = "bin_left,bin_right,orig,unrestricted,restricted"
    text = _csv_text(header, diag.csv_rows(), config)
    extra = (f"# tail_mass_unrestricted: {_fmt(diag.tail_mass_unrestricted)}\n"
             f"# tail_mass_restricted: {_fmt(diag.tail_mass_restricted)}\n")
    return extra + text


def _cmd_density(args) -> int:
    seed = _resolve_seed(args)
    ds = _load_dataset(args)
    j = ds.feature_index(args.feature)
    file_config = {"command": "density", "data": os.path.basename(args.data),
                   "target": args.target, "model": args.model,
                   "feature": args.feature, "strategy": args.strategy,
                   "bins": args.bins, "seed": seed,
                   "s_rule": args.s_rule, "regression": args.regression}

    def workload(model):
        return density_diagnostic(model, ds, j, strategy=args.strategy,
                                  seed=_density_seed(seed, j), bins=args.bins,
                                  regression=args.regression,
                                  s_rule=args.s_rule)

    kind, arg = _parse_model_spec(args.model)
    if kind == "predictions":
        diag = _run_with_external_model(workload, ds, arg, args.out, file_config)
    else:
        diag = workload(_build_model(args.model, ds))
    name = f"density_{args.feature}.csv"
    _write_text(os.path.join(args.out, name), _density_csv(diag, file_config))
    print(f"wrote {name} in {args.out}")
    return 0


def _cmd_ale(args) -> int:
    seed = _resolve_seed(args)
    ds = _load_dataset(args)
    ks = [args.k]
    if args.k_sweep:
        ks = []
        for tok in args.k_sweep.split(","):
            try:
                ks.append(int(tok))
            except ValueError:
                raise UsageError(f"bad --k-sweep entry {tok!r}") from None
        if any(k < 1 for k in ks):
            raise UsageError("--k-sweep entries must be >= 1")
    if args.features:
        feats = [ds.feature_index(n.strip()) for n in args.features.split(",")]
    else:
        feats = list(range(ds.d))
    file_config = {"command": "ale", "data": os.path.basename(args.data),
                   "target": args.target, "model": args.model,
                   "k_values": ks, "grid_kind": args.grid,
                   "center": args.center, "seed": seed}

    def workload(model):
        summary = []
        curves = {}
        for j in feats:
            name = ds.column_names[j]
            for k in ks:
                try:
                    grid = build_grid(ds, j, k, args.grid)
                except DegenerateColumn:
                    summary.append((name, k, 0.0, 0.0, 0.0, "degenerate"))
                    continue
                eff = local_effects(model, ds, grid)
                curve = ale_curve(eff, center=args.center)
                curves[(name, k)] = curve
                summary.append((name, k,
                                tau_ale(model, ds, grid, eff),
                                kappa_ale(model, ds, grid, eff),
                                extrapolation_radius(grid),
                                "merged-bins" if grid.merged else ""))
        return summary, curves

    kind, arg = _parse_model_spec(args.model)
    if kind == "predictions":
        summary, curves = _run_with_external_model(
            workload, ds, arg, args.out, file_config)
    else:
        summary, curves = workload(_build_model(args.model, ds))

    for (name, k), curve in curves.items():
        path = os.path.join(args.out, f"ale_{name}_K{k}.csv")
        _write_text(path, _csv_text("edge,value,bin_count",
                                    curve.to_csv_rows(), file_config))
    _write_text(os.path.join(args.out, "ale_summary.csv"),
                _csv_text("feature,k,tau_ale,kappa_ale,extrapolation_radius,flags",
                          summary, file_config))
    print(f"wrote {len(curves)} curve files and ale_summary.csv in {args.out}")
    return 0


# ------------------------------------------------------------- arg parser

def _add_common_data_flags(p):
    p.add_argument("--data", required=True, help="input CSV path")
    p.add_argument("--target", required=True, help="target column name")
    p.add_argument("--missing-policy", choices=("reject", "drop_row"),
                   default="reject")
    p.add_argument("--model", required=True,
                   help="exact:<id> | ols[:interactions] | knn:<k> | predictions:<path>")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: $PERMSAFE_SEED or 0)")
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permsafe",
        description="Permutation feature importance without extrapolation")
    parser.add_argument("--version", action="version",
                        version=f"permsafe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a synthetic benchmark dataset")
    g.add_argument("benchmark", choices=("hooker",))
    g.add_argument("--rho", type=float, default=0.0)
    g.add_argument("--n", type=int, default=2000)
    g.add_argument("--noise-sd", type=float, default=0.1)
    g.add_argument("--outer", type=int, default=2000,
                   help="oracle outer loop size (rho != 0)")
    g.add_argument("--inner", type=int, default=2000,
                   help="oracle inner loop size (rho != 0)")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", default=".")
    g.set_defaults(func=_cmd_generate)

    t = sub.add_parser("truth", help="ground-truth importance values")
    t.add_argument("benchmark", choices=("hooker",))
    t.add_argument("--rho", type=float, default=0.0)
    t.add_argument("--outer", type=int, default=2000)
    t.add_argument("--inner", type=int, default=2000)
    t.add_argument("--force-oracle", action="store_true",
                   help="use the Monte Carlo oracle even at rho = 0")
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--out", default=None, help="output JSON path (default: stdout)")
    t.set_defaults(func=_cmd_truth)

    i = sub.add_parser("importance", help="replicated importance report")
    _add_common_data_flags(i)
    i.add_argument("--measures", default="nu",
                   help="comma list from: " + ",".join(MEASURES))
    i.add_argument("--strategies", "--strategy", default="unrestricted",
                   help="strategies expanding the nu measure: unrestricted,gcmr,gknock")
    i.add_argument("-R", "--replicates", type=int, default=50)
    i.add_argument("--k", type=int, default=10, help="ALE bins")
    i.add_argument("--grid", choices=("quantile", "uniform"), default="quantile")
    i.add_argument("--loss", choices=("quadratic", "absolute"), default="quadratic")
    i.add_argument("--regression", choices=("linear", "knn"), default="linear",
                   help="conditional-mean regression for GCMR")
    i.add_argument("--s-rule", choices=("ci", "equi"), default="ci",
                   help="knockoff diagonal rule")
    i.add_argument("--shrinkage", type=float, default=1e-3)
    i.add_argument("--density", default=None, metavar="FEATURE",
                   help="also write the density diagnostic for this feature")
    i.add_argument("--bins", type=int, default=50)
    i.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    i.set_defaults(func=_cmd_importance)

    a = sub.add_parser("ale", help="ALE curves and index sweep")
    _add_common_data_flags(a)
    a.add_argument("--features", default=None, help="comma list (default: all)")
    a.add_argument("--k", type=int, default=10)
    a.add_argument("--k-sweep", default=None, help="e.g. 5,10,20")
    a.add_argument("--grid", choices=("quantile", "uniform"), default="quantile")
    a.add_argument("--center", action="store_true")
    a.set_defaults(func=_cmd_ale)

    de = sub.add_parser("density", help="prediction-density diagnostic")
    _add_common_data_flags(de)
    de.add_argument("--feature", required=True)
    de.add_argument("--strategy", choices=("gcmr", "gknock"), default="gcmr")
    de.add_argument("--bins", type=int, default=50)
    de.add_argument("--regression", choices=("linear", "knn"), default="linear")
    de.add_argument("--s-rule", choices=("ci", "equi"), default="ci")
    de.set_defaults(func=_cmd_density)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QueriesWritten:
        return 0
    except UsageError as exc:
        print(f"permsafe: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProtocolError, *_DATA_ERRORS) as exc:
        print(f"permsafe: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERICAL_ERRORS as exc:
        print(f"permsafe: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"permsafe: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PermsafeError as exc:
        print(f"permsafe: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
