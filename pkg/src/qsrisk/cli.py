"""Command-line entry point: ``qsrisk <subcommand> ...``.

Exit status: 0 success, 1 validation error, 2 numerical non-convergence,
64 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import LOSS_TYPES, ValidationError, emit_csv, event_totals, ingest_csv, losses_by_type
from .frequency import (
    ConvergenceError,
    DegenerateSampleError,
    ResponseKind,
    fit_ncd_regression,
    mean_change_series,
    ncd_sample_means,
    predicted_mean_grid,
    PredictedMeanGrid,
)
from .pricing import OfferScenario, evaluate_offer
from .reinsurance import FIG2_QUOTAS, quota_sweep, summary_csv
from .risk import DEFAULT_PERCENTILES, EmptySampleError, default_workers, risk_table, var_empirical
from .severity import SeverityFitError, best_fit, kde_density
from .synthgen import ConfigError, default_config, generate_portfolio

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64
GRID_POINTS = 256


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _float_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


# --- output handling ---------------------------------------------------------

class Outputs:
    """Collects files in memory and commits them with atomic renames."""

    def __init__(self, root):
        self.root = Path(root)
        self.files = {}

    def add(self, rel, text):
        self.files[rel] = text

    def add_json(self, rel, obj):
        self.add(rel, json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n")

    def commit(self):
        for rel, text in self.files.items():
            path = self.root / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(args, config=None, inputs=None, workers=None):
    return {
        "command": args.command,
        "options": {k: v for k, v in sorted(vars(args).items())
                    if k not in ("func", "argv", "out", "command")},
        "config": config,
        "seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "input_digests": inputs or {},
        "workers": workers,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


# --- data source --------------------------------------------------------------

def _load(args):
    """Return (portfolio, config snapshot, input digests)."""
    if args.policies or args.claims:
        if not (args.policies and args.claims):
            raise UsageError("--policies and --claims must be given together")
        for p in (args.policies, args.claims):
            if not Path(p).is_file():
                raise ValidationError(f"missing input file: {p}")
        portfolio = ingest_csv(Path(args.policies).read_bytes(), Path(args.claims).read_bytes())
        digests = {"policies": _digest(args.policies), "claims": _digest(args.claims)}
        return portfolio, None, digests
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.n_policyholders is not None:
        overrides["n_policyholders"] = args.n_policyholders
    cfg = default_config(**overrides)
    args.seed = cfg.seed
    return generate_portfolio(cfg), cfg.to_dict(), {}


# --- stages ---------------------------------------------------------------------

def _kind_list(kind):
    if kind is None:
        return list(ResponseKind)
    return [ResponseKind(kind)]


def frequency_outputs(portfolio, kinds, out, prefix="", changes=True):
    models = [fit_ncd_regression(portfolio, k) for k in kinds]
    grid = predicted_mean_grid(models)
    out.add(f"{prefix}table1.csv", grid.to_csv())
    sample = PredictedMeanGrid({k: ncd_sample_means(portfolio, k) for k in kinds})
    out.add(f"{prefix}table1_sample_means.csv", sample.to_csv())
    out.add_json(f"{prefix}frequency_models.json", [
        {"response_kind": m.response_kind.value, "intercept": m.intercept, "slope": m.slope,
         "r": m.r, "n": m.n, "loglik": m.loglik, "iterations": m.iterations}
        for m in models])
    if changes:
        out.add(f"{prefix}fig1.csv", changes_csv(mean_change_series(grid)))
    return grid


def changes_csv(series):
    levels = (0, 10, 20, 30, 40, 50)
    cols = [f"change_{a}_{b}" for a, b in zip(levels[:-1], levels[1:])]
    lines = ["response_kind," + ",".join(cols)]
    for k, v in series.items():
        lines.append(k.value + "," + ",".join(repr(float(d)) for d in v))
    return "\n".join(lines) + "\n"


def density_csv(grid, dens):
    lines = ["x,density"]
    lines.extend(f"{float(x)!r},{float(d)!r}" for x, d in zip(grid, dens))
    return "\n".join(lines) + "\n"


def severity_outputs(portfolio, out, prefix="", workers=1):
    samples = {t: losses_by_type(portfolio, t) for t in LOSS_TYPES}

    def work(t):
        s = samples[t]
        try:
            fit = best_fit(s).to_dict()
        except SeverityFitError as e:
            fit = {"error": str(e), "n": s.n}
        dens = None
        if s.n >= 2:
            grid = np.linspace(0.0, var_empirical(s, 0.99), GRID_POINTS)
            try:
                dens = density_csv(grid, kde_density(s, grid))
            except ValueError:
                dens = None
        return t, fit, dens

    with ThreadPoolExecutor(max_workers=max(1, min(workers, 3))) as ex:
        results = list(ex.map(work, LOSS_TYPES))
    fits = {}
    for t, fit, dens in results:
        fits[t.value] = fit
        if dens is not None:
            out.add(f"{prefix}density_{t.value}.csv", dens)
    out.add_json(f"{prefix}fits.json", fits)


def quota_outputs(portfolio, quotas, out, prefix=""):
    sample = event_totals(portfolio)
    if sample.n == 0:
        raise EmptySampleError("empty portfolio: no claim events")
    retained, rows = quota_sweep(sample, quotas)
    out.add(f"{prefix}summary.csv", summary_csv(rows))
    if sample.n >= 2:
        grid = np.linspace(0.0, var_empirical(sample, 0.99), GRID_POINTS)
        for q, r in retained.items():
            try:
                out.add(f"{prefix}density_q{q:g}.csv", density_csv(grid, kde_density(r, grid)))
            except ValueError:
                pass


def risk_outputs(portfolio, percentiles, out, seed, workers, prefix=""):
    report = risk_table(portfolio, percentiles, mc_seed=seed, workers=workers)
    out.add(f"{prefix}table2.csv", report.to_csv())
    out.add_json(f"{prefix}table2.json", report.to_dict())
    return report


# --- commands ---------------------------------------------------------------------

def cmd_generate(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.n_policyholders is not None:
        overrides["n_policyholders"] = args.n_policyholders
    cfg = default_config(**overrides)
    args.seed = cfg.seed
    pol, clm = emit_csv(generate_portfolio(cfg))
    out = Outputs(args.out)
    out.add("policies.csv", pol)
    out.add("claims.csv", clm)
    out.add_json("gen-manifest.json", _manifest(args, config=cfg.to_dict()))
    out.commit()


def cmd_ingest(args):
    if not (args.policies and args.claims):
        raise UsageError("ingest needs --policies and --claims")
    portfolio, _, digests = _load(args)
    pol, clm = emit_csv(portfolio)
    out = Outputs(args.out)
    out.add("policies.csv", pol)
    out.add("claims.csv", clm)
    out.add_json("summary.json", {"policyholders": len(portfolio.policyholders),
                                  "events": len(portfolio.events)})
    out.add_json("manifest.json", _manifest(args, inputs=digests))
    out.commit()


def cmd_fit_frequency(args):
    portfolio, cfg, digests = _load(args)
    out = Outputs(args.out)
    frequency_outputs(portfolio, _kind_list(args.kind), out, changes=args.changes)
    out.add_json("manifest.json", _manifest(args, cfg, digests))
    out.commit()


def cmd_fit_severity(args):
    portfolio, cfg, digests = _load(args)
    workers = default_workers()
    out = Outputs(args.out)
    severity_outputs(portfolio, out, workers=workers)
    out.add_json("manifest.json", _manifest(args, cfg, digests, workers))
    out.commit()


def cmd_quota_share(args):
    portfolio, cfg, digests = _load(args)
    out = Outputs(args.out)
    quota_outputs(portfolio, args.quotas, out)
    out.add_json("manifest.json", _manifest(args, cfg, digests))
    out.commit()


def cmd_risk_report(args):
    portfolio, cfg, digests = _load(args)
    workers = default_workers()
    out = Outputs(args.out)
    risk_outputs(portfolio, args.percentiles, out, args.seed or 0, workers)
    out.add_json("manifest.json", _manifest(args, cfg, digests, workers))
    out.commit()


def cmd_bundle_advise(args):
    scenario = OfferScenario(tuple(args.components), args.bundle,
                             value_add_present=args.value_add_ref is not None,
                             value_add_reference_price=args.value_add_ref or 0.0)
    print(json.dumps(evaluate_offer(scenario).to_dict(), sort_keys=True, indent=2))


def cmd_pipeline(args):
    portfolio, cfg, digests = _load(args)
    workers = default_workers()
    out = Outputs(args.out)
    frequency_outputs(portfolio, list(ResponseKind), out)
    quota_outputs(portfolio, args.quotas, out, prefix="fig2/")
    severity_outputs(portfolio, out, prefix="fig3/", workers=workers)
    risk_outputs(portfolio, args.percentiles, out, args.seed or 0, workers)
    out.add_json("manifest.json", _manifest(args, cfg, digests, workers))
    out.commit()


def build_parser():
    parser = _Parser(prog="qsrisk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def data_opts(p, out_default):
        p.add_argument("--seed", type=int, default=None, help="generator seed (u64)")
        p.add_argument("--n-policyholders", type=int, default=None)
        p.add_argument("--policies", help="policies.csv to ingest instead of generating")
        p.add_argument("--claims", help="claims.csv to ingest instead of generating")
        p.add_argument("--out", default=out_default)

    p = sub.add_parser("generate", help="write a synthetic portfolio")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-policyholders", type=int, default=None)
    p.add_argument("--out", default="portfolio")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="validate and canonicalize CSV input")
    data_opts(p, "ingested")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fit-frequency", help="NB regression on NCD level")
    data_opts(p, "frequency")
    p.add_argument("--kind", choices=[k.value for k in ResponseKind], default=None)
    p.add_argument("--changes", action="store_true", help="also write the change series")
    p.set_defaults(func=cmd_fit_frequency)

    p = sub.add_parser("fit-severity", help="per-coverage severity fits and densities")
    data_opts(p, "severity")
    p.set_defaults(func=cmd_fit_severity)

    p = sub.add_parser("quota-share", help="retained losses under quota shares")
    data_opts(p, "quota-share")
    p.add_argument("--quotas", type=_float_list, default=list(FIG2_QUOTAS))
    p.set_defaults(func=cmd_quota_share)

    p = sub.add_parser("risk-report", help="VaR/CTE by coverage, bundled vs unbundled")
    data_opts(p, "risk-report")
    p.add_argument("--percentiles", type=_float_list, default=list(DEFAULT_PERCENTILES))
    p.set_defaults(func=cmd_risk_report)

    p = sub.add_parser("bundle-advise", help="reference-price guidance for a bundle")
    p.add_argument("--components", type=_float_list, required=True)
    p.add_argument("--bundle", type=float, required=True)
    p.add_argument("--value-add-ref", type=float, default=None)
    p.set_defaults(func=cmd_bundle_advise)

    p = sub.add_parser("pipeline", help="run every stage")
    data_opts(p, "pipeline-out")
    p.add_argument("--quotas", type=_float_list, default=list(FIG2_QUOTAS))
    p.add_argument("--percentiles", type=_float_list, default=list(DEFAULT_PERCENTILES))
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    args.argv = argv
    try:
        args.func(args)
    except UsageError as e:
        print(f"qsrisk: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as e:
        print(f"qsrisk: non-convergence: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, ConfigError, EmptySampleError, DegenerateSampleError,
            SeverityFitError, ValueError) as e:
        print(f"qsrisk: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
