"""Command-line front end: CSV ingestion, model specification and the
fit / dbb / envelope / cv / mc / vif subcommands.

Outputs: a ``summary.json`` (validated against the shipped schema, with
the run manifest embedded for provenance), ``detail_*.csv`` tables and
``plotdata_*.csv`` files formatted for external plotting. Identical
manifest and seed produce byte-identical outputs. Floats are serialized
with full round-trip precision (up to 17 significant digits).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import jsonschema

from . import __version__
from .dbb import dbb_test
from .diagnostics import (
    cross_validate,
    pearson_residuals,
    quantile_residuals,
    simulated_envelope,
    vif_select,
)
from .regression import Dataset, DesignError, fit_bessel_em, fit_beta_ml, wald_inference
from .simstudy import MCConfig, run_dbb_study, run_mc

OUTPUT_DIR_ENV = "BESSELREG_OUTPUT_DIR"
RESCALE_EPS = 1e-6


class CLIError(Exception):
    """User-facing error carrying an exit code."""

    def __init__(self, message, code=2):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    subcommand: str
    inputs: list
    roles: dict
    seed: int | None
    tolerances: dict
    output_dir: str
    links: dict = field(default_factory=lambda: {"mean": "logit", "precision": "log"})
    tool_version: str = __version__


def _read_table(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise CLIError(f"{path}: empty file")
            rows = list(reader)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise CLIError(f"{path}: no rows")
    data = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise CLIError(f"{path}: row {i + 2} has {len(row)} fields, "
                           f"expected {len(header)}")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise CLIError(
                    f"{path}: non-numeric cell at row {i + 2}, "
                    f"column {header[j]!r}: {cell!r}") from None
    return header, data


def ingest_csv(path, roles, rescale=None, drop_rows=()):
    """Build a Dataset from a CSV file.

    roles: dict with keys response, mean_covariates, precision_covariates,
    intercept_mean, intercept_precision. rescale: optional (min, max)
    applied to the response as (y - min)/(max - min), then clamped to
    (RESCALE_EPS, 1 - RESCALE_EPS) with the clamp count reported.
    Returns (Dataset, ingestion_report_dict).
    """
    header, data = _read_table(path)

    def col(name):
        if name not in header:
            raise CLIError(f"{path}: missing column {name!r}")
        return data[:, header.index(name)]

    if drop_rows:
        bad = [r for r in drop_rows if not 1 <= r <= data.shape[0]]
        if bad:
            raise CLIError(f"{path}: --drop-rows out of range: {bad}")
        data = np.delete(data, [r - 1 for r in drop_rows], axis=0)

    z = col(roles["response"])
    clamped = 0
    if rescale is not None:
        lo, hi = rescale
        if hi <= lo:
            raise CLIError("rescale max must exceed min")
        if np.any(z < lo) or np.any(z > hi):
            raise CLIError(
                f"{path}: response values outside the rescale range "
                f"[{lo}, {hi}]")
        z = (z - lo) / (hi - lo)
        below = z < RESCALE_EPS
        above = z > 1.0 - RESCALE_EPS
        clamped = int(np.count_nonzero(below) + np.count_nonzero(above))
        z = np.clip(z, RESCALE_EPS, 1.0 - RESCALE_EPS)

    n = z.size

    def design(names, intercept, tag):
        cols, labels = [], []
        if intercept:
            cols.append(np.ones(n))
            labels.append("intercept")
        for name in names:
            cols.append(col(name))
            labels.append(name)
        if not cols:
            raise CLIError(f"{tag} design has no columns "
                           "(no covariates and intercept suppressed)")
        return np.column_stack(cols), labels

    X, x_names = design(roles["mean_covariates"],
                        roles["intercept_mean"], "mean")
    V, v_names = design(roles["precision_covariates"],
                        roles["intercept_precision"], "precision")
    try:
        ds = Dataset(z, X, V, x_names, v_names,
                     response_name=roles["response"])
    except DesignError as exc:
        raise CLIError(f"{path}: {exc}") from exc
    return ds, {"n": n, "rescale_clamped": clamped, "dropped_rows": list(drop_rows)}


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def _plain(obj):
    """Recursively convert numpy scalars/arrays to plain Python types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def _load_schema():
    with resources.files("besselreg").joinpath("output_schema.json").open() as fh:
        return json.load(fh)


def _write_summary(outdir, manifest, results):
    doc = {
        "schema_version": "1",
        "manifest": _plain(asdict(manifest)),
        "results": _plain(results),
    }
    jsonschema.validate(doc, _load_schema())
    path = outdir / "summary.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating))
                             else v for v in row])


def _outdir(args):
    base = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _dataset_from_args(args):
    roles = {
        "response": args.response,
        "mean_covariates": args.mean_covariates,
        "precision_covariates": args.precision_covariates,
        "intercept_mean": not args.no_mean_intercept,
        "intercept_precision": not args.no_precision_intercept,
    }
    rescale = tuple(args.rescale) if args.rescale else None
    data, report = ingest_csv(args.data, roles, rescale=rescale,
                              drop_rows=args.drop_rows or ())
    roles["rescale"] = list(rescale) if rescale else None
    roles["drop_rows"] = list(args.drop_rows or ())
    return data, roles, report


def _fit_table(fit):
    return wald_inference(fit, level=0.95)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fit(args):
    data, roles, report = _dataset_from_args(args)
    outdir = _outdir(args)
    manifest = RunManifest("fit", [args.data], roles, None,
                           {"em_epsilon": 1e-5}, str(outdir))
    results = {"ingestion": report, "models": {}}
    rows = []
    models = ["bessel", "beta"] if args.model == "both" else [args.model]
    for model in models:
        fit = fit_bessel_em(data) if model == "bessel" else fit_beta_ml(data)
        table = _fit_table(fit)
        results["models"][model] = {
            "coefficients": table,
            "loglik": fit.loglik,
            "em_iterations": fit.em_iterations,
            "converged": fit.converged,
            "info_warning": fit.info_warning,
        }
        for entry in table:
            rows.append([model, entry["block"], entry["name"],
                         entry["estimate"], entry["se"],
                         entry["z"], entry["p"], entry["ci_lo"], entry["ci_hi"]])
    _write_csv(outdir / "detail_coefficients.csv",
               ["model", "block", "coefficient", "estimate", "se", "z", "p",
                "ci_lo", "ci_hi"], rows)
    _write_summary(outdir, manifest, results)
    return 0


def cmd_dbb(args):
    data, roles, report = _dataset_from_args(args)
    outdir = _outdir(args)
    manifest = RunManifest("dbb", [args.data], roles, None, {}, str(outdir))
    rep = dbb_test(data)
    results = {
        "ingestion": report,
        "decision": rep.decision,
        "mean_sq_response": rep.mean_sq_response,
        "variance_bound": rep.variance_bound,
        "variance_bound_sum": rep.variance_bound_sum,
        "d_bessel": rep.d_bessel,
        "d_beta": rep.d_beta,
        "precheck_beta": rep.precheck_beta,
        "kappa_tilde": rep.kappa_tilde,
        "lambda_tilde_bessel": rep.lambda_tilde_bessel,
        "lambda_tilde_beta": rep.lambda_tilde_beta,
    }
    rows = []
    for i in range(data.n):
        rows.append([
            i + 1, float(rep.mu_tilde[i]),
            float(rep.phi_tilde_bessel[i]) if rep.phi_tilde_bessel is not None else "",
            float(rep.phi_tilde_beta[i]) if rep.phi_tilde_beta is not None else "",
        ])
    _write_csv(outdir / "detail_dbb.csv",
               ["obs", "mu_tilde", "phi_tilde_bessel", "phi_tilde_beta"], rows)
    _write_summary(outdir, manifest, results)
    print(f"decision: {rep.decision}")
    return 0


def cmd_envelope(args):
    data, roles, report = _dataset_from_args(args)
    outdir = _outdir(args)
    manifest = RunManifest(
        "envelope", [args.data], roles, args.seed,
        {"B": args.replications, "coverage": args.coverage}, str(outdir))
    fit = (fit_bessel_em(data) if args.model == "bessel"
           else fit_beta_ml(data))
    env = simulated_envelope(fit, data, B=args.replications,
                             coverage=args.coverage,
                             residual_kind=args.residuals,
                             seed=args.seed, n_jobs=args.threads)
    results = {
        "ingestion": report,
        "model": args.model,
        "residual_kind": env.residual_kind,
        "coverage_pct": env.coverage_pct,
        "replications_used": env.replications,
        "dropped": env.dropped,
    }
    rows = list(zip(
        range(1, data.n + 1),
        env.theoretical_quantiles, env.sorted_observed_residuals,
        env.lower_band, env.band_mean, env.upper_band))
    _write_csv(outdir / "plotdata_envelope.csv",
               ["rank", "theoretical_quantile", "observed_residual",
                "lower", "mean", "upper"], rows)
    _write_summary(outdir, manifest, results)
    print(f"coverage: {env.coverage_pct:.2f}%")
    return 0


def cmd_cv(args):
    data, roles, report = _dataset_from_args(args)
    outdir = _outdir(args)
    manifest = RunManifest(
        "cv", [args.data], roles, args.seed,
        {"test_size": args.test_size, "partitions": args.partitions},
        str(outdir))
    res = cross_validate(data, test_size=args.test_size,
                         partitions=args.partitions, seed=args.seed,
                         n_jobs=args.threads)
    frac_rss = float(np.mean(res.rss_ratio < 1.0))
    frac_fsmd = float(np.mean(res.fsmd_ratio < 1.0))
    results = {
        "ingestion": report,
        "partitions_used": int(res.rss_bessel.size),
        "dropped": res.dropped,
        "frac_rss_bessel_better": frac_rss,
        "frac_fsmd_bessel_better": frac_fsmd,
        "mean_rss": {"bessel": float(res.rss_bessel.mean()),
                     "beta": float(res.rss_beta.mean())},
        "mean_fsmd": {"bessel": float(res.fsmd_bessel.mean()),
                      "beta": float(res.fsmd_beta.mean())},
    }
    rows = list(zip(
        range(1, res.rss_bessel.size + 1),
        res.rss_bessel, res.rss_beta, res.fsmd_bessel, res.fsmd_beta,
        res.rss_ratio, res.fsmd_ratio))
    _write_csv(outdir / "plotdata_cv.csv",
               ["partition", "rss_bessel", "rss_beta", "fsmd_bessel",
                "fsmd_beta", "rss_ratio", "fsmd_ratio"], rows)
    _write_summary(outdir, manifest, results)
    print(f"RSS bessel better in {100 * frac_rss:.1f}% of partitions; "
          f"FSMD in {100 * frac_fsmd:.1f}%")
    return 0


def _mc_config_from_file(path, seed):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CLIError(f"cannot read mc config {path}: {exc}") from exc
    mode = raw.pop("mode", "estimation")
    if mode not in ("estimation", "dbb"):
        raise CLIError(f"mc config: unknown mode {mode!r}")
    raw.setdefault("master_seed", seed)
    if "fit_models" in raw:
        raw["fit_models"] = tuple(raw["fit_models"])
    try:
        config = MCConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise CLIError(f"mc config: {exc}") from exc
    return mode, config


def cmd_mc(args):
    outdir = _outdir(args)
    mode, config = _mc_config_from_file(args.config, args.seed)
    manifest = RunManifest(
        "mc", [args.config], {"mode": mode}, args.seed,
        {"replications": config.replications, "n": config.n}, str(outdir))
    if mode == "dbb":
        cfg_b = MCConfig(**{**_mc_dict(config), "generator": "bessel",
                            "true_lambda": config.true_lambda})
        cfg_t = MCConfig(**{**_mc_dict(config), "generator": "beta",
                            "true_lambda": config.true_lambda})
        rates = run_dbb_study(cfg_b, cfg_t, n_jobs=args.threads)
        results = {"mode": mode, "config": _mc_dict(config),
                   "selection_rates": rates}
        _write_summary(outdir, manifest, results)
        for gen, row in rates.items():
            print(f"{gen} generator: {row['pct_bessel_selected']:.1f}% "
                  "classified bessel")
        return 0
    report = run_mc(config, n_jobs=args.threads)
    results = {
        "mode": mode,
        "config": _mc_dict(config),
        "failures": report.failures,
        "coef_names": report.coef_names,
        "truth": report.truth,
        "summary": report.summary,
    }
    for model, est in report.estimates.items():
        rows = [[r + 1] + list(map(float, est[r]))
                for r in range(est.shape[0])]
        _write_csv(outdir / f"detail_estimates_{model}.csv",
                   ["replication"] + report.coef_names, rows)
        ses = report.std_errors[model]
        rows = [[r + 1] + list(map(float, ses[r]))
                for r in range(ses.shape[0])]
        _write_csv(outdir / f"detail_std_errors_{model}.csv",
                   ["replication"] + report.coef_names, rows)
    _write_summary(outdir, manifest, results)
    return 0


def _mc_dict(config):
    d = asdict(config)
    d["fit_models"] = tuple(d["fit_models"])
    return d


def cmd_vif(args):
    header, data = _read_table(args.data)
    missing = [c for c in args.columns if c not in header]
    if missing:
        raise CLIError(f"{args.data}: missing columns {missing}")
    if args.drop_rows:
        data = np.delete(data, [r - 1 for r in args.drop_rows], axis=0)
    M = np.column_stack([data[:, header.index(c)] for c in args.columns])
    kept, trace = vif_select(M, list(args.columns), threshold=args.threshold)
    outdir = _outdir(args)
    manifest = RunManifest(
        "vif", [args.data],
        {"columns": list(args.columns), "drop_rows": list(args.drop_rows or ())},
        None, {"threshold": args.threshold}, str(outdir))
    results = {
        "kept": kept,
        "removed": [{"column": t.column, "vif": t.vif} for t in trace],
    }
    _write_csv(outdir / "detail_vif.csv", ["order", "column", "vif"],
               [[i + 1, t.column, t.vif] for i, t in enumerate(trace)])
    _write_summary(outdir, manifest, results)
    print("kept:", ", ".join(kept))
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_dataset_args(sp):
    sp.add_argument("data", help="input CSV (header row, comma-separated)")
    sp.add_argument("--response", required=True, help="response column name")
    sp.add_argument("--mean-covariates", nargs="*", default=[],
                    metavar="COL", help="columns for the mean design X")
    sp.add_argument("--precision-covariates", nargs="*", default=[],
                    metavar="COL", help="columns for the precision design V")
    sp.add_argument("--no-mean-intercept", action="store_true")
    sp.add_argument("--no-precision-intercept", action="store_true")
    sp.add_argument("--rescale", nargs=2, type=float, metavar=("MIN", "MAX"),
                    help="linear rescale of the response to (0,1)")
    sp.add_argument("--drop-rows", nargs="*", type=int, default=[],
                    metavar="ROW", help="1-based data rows to exclude")


def _add_common_output(sp):
    sp.add_argument("--output-dir", default=None,
                    help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker count (does not affect results)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="besselreg",
        description="Bessel regression toolkit for responses in (0,1)")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("fit", help="fit bessel and/or beta regressions")
    _add_dataset_args(sp)
    _add_common_output(sp)
    sp.add_argument("--model", choices=["bessel", "beta", "both"],
                    default="both")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("dbb", help="bessel-vs-beta discrimination test")
    _add_dataset_args(sp)
    _add_common_output(sp)
    sp.set_defaults(func=cmd_dbb)

    sp = sub.add_parser("envelope", help="simulated residual envelope")
    _add_dataset_args(sp)
    _add_common_output(sp)
    sp.add_argument("--model", choices=["bessel", "beta"], required=True)
    sp.add_argument("--residuals", choices=["pearson", "quantile"],
                    default="pearson")
    sp.add_argument("--replications", type=int, default=1000, metavar="B")
    sp.add_argument("--coverage", type=float, default=0.95)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=cmd_envelope)

    sp = sub.add_parser("cv", help="predictive cross-validation (RSS, FSMD)")
    _add_dataset_args(sp)
    _add_common_output(sp)
    sp.add_argument("--test-size", type=int, default=10)
    sp.add_argument("--partitions", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=cmd_cv)

    sp = sub.add_parser("mc", help="Monte Carlo simulation study")
    sp.add_argument("config", help="JSON config file")
    _add_common_output(sp)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("vif", help="iterative VIF covariate selection")
    sp.add_argument("data", help="input CSV")
    sp.add_argument("--columns", nargs="+", required=True, metavar="COL")
    sp.add_argument("--threshold", type=float, default=5.0)
    sp.add_argument("--drop-rows", nargs="*", type=int, default=[],
                    metavar="ROW")
    _add_common_output(sp)
    sp.set_defaults(func=cmd_vif)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return exc.code
    except Exception as exc:  # propagate module errors with context
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
