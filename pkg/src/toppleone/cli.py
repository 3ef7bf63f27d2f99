"""Command-line front-end: fit, sample, eval, and study over files.

Exit codes: 0 success, 1 input error (bad flags, unreadable or
malformed files, domain errors), 2 fit did not converge (the report is
still emitted).  Reports go to stdout, diagnostics to stderr.  All
numbers are serialized with 17 significant digits so that parsing the
output reproduces every float bit-for-bit.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .data import SortedSample
from .distributions import (TleParams, TlqeParams, cdf_tle, cdf_tlqe,
                            pdf_tle, pdf_tlqe, quantile_tle, quantile_tlqe,
                            sample, support)
from .estimators import FitRequest, FitResult, Method, fit
from .montecarlo import StudyConfig, StudyReport, run_study
from .optimize import NoFeasibleStartError, OptimizerConfig

__all__ = ["main", "entry"]


class CliInputError(Exception):
    """Input problem that maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise CliInputError(message)


# ---------------------------------------------------------------------------
# Serialization: 17-significant-digit JSON and CSV
# ---------------------------------------------------------------------------

def format_float(v: float) -> str:
    s = format(float(v), ".17g")
    return s


def _json_scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f) or math.isinf(f):
            return "null"
        s = format_float(f)
        if not any(c in s for c in ".eE"):
            s += ".0"
        return s
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v)!r}")


def dumps_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps_json(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{dumps_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _json_scalar(obj)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return ""
        return format_float(f)
    return str(v)


def _write_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Input files
# ---------------------------------------------------------------------------

def read_observations(path: str) -> np.ndarray:
    """Parse a data file: one nonnegative decimal per line, blank lines
    and '#' comment lines ignored; errors carry line numbers."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}")
    values = []
    for lineno, raw in enumerate(lines, start=1):
        token = raw.strip()
        if not token or token.startswith("#"):
            continue
        try:
            v = float(token)
        except ValueError:
            raise CliInputError(f"{path}:{lineno}: not a number: {token!r}")
        if math.isnan(v) or math.isinf(v):
            raise CliInputError(f"{path}:{lineno}: observation must be finite")
        if v < 0.0:
            raise CliInputError(f"{path}:{lineno}: observation must be nonnegative")
        values.append(v)
    if not values:
        raise CliInputError(f"{path}: no observations found")
    return np.asarray(values, dtype=np.float64)


def _require(cond: bool, field: str, message: str):
    if not cond:
        raise CliInputError(f"config.{field}: {message}")


def load_study_config(path: str) -> StudyConfig:
    """Load and validate a study configuration, reporting field paths."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise CliInputError(f"{path}: invalid JSON: {exc}")
    if not isinstance(raw, dict):
        raise CliInputError("config: must be a JSON object")

    known = {"distribution", "alpha", "lambda", "q", "sample_sizes",
             "replications", "methods", "master_seed", "parallelism"}
    for key in raw:
        _require(key in known, key, "unknown field")

    dist = raw.get("distribution")
    _require(dist in ("tle", "tlqe"), "distribution", "must be 'tle' or 'tlqe'")
    _require(isinstance(raw.get("alpha"), (int, float)) and raw["alpha"] > 0,
             "alpha", "must be a positive number")
    _require(isinstance(raw.get("lambda"), (int, float)) and raw["lambda"] > 0,
             "lambda", "must be a positive number")
    q = raw.get("q")
    if dist == "tlqe":
        _require(isinstance(q, (int, float)) and q < 2, "q",
                 "must be a number below 2")
    else:
        _require(q is None, "q", "only valid for distribution 'tlqe'")
    sizes = raw.get("sample_sizes")
    _require(isinstance(sizes, list) and len(sizes) > 0, "sample_sizes",
             "must be a nonempty list of integers")
    for idx, n in enumerate(sizes):
        _require(isinstance(n, int) and n >= 3, f"sample_sizes[{idx}]",
                 "must be an integer >= 3")
    reps = raw.get("replications")
    _require(isinstance(reps, int) and reps >= 1, "replications",
             "must be an integer >= 1")
    methods = raw.get("methods")
    _require(isinstance(methods, list) and len(methods) > 0, "methods",
             "must be a nonempty list")
    valid = tuple(m.value for m in Method)
    for idx, m in enumerate(methods):
        _require(m in valid, f"methods[{idx}]", f"must be one of {valid}")
    seed = raw.get("master_seed")
    _require(isinstance(seed, int), "master_seed", "must be an integer")
    par = raw.get("parallelism", 1)
    _require(isinstance(par, int) and par >= 1, "parallelism",
             "must be an integer >= 1")
    return StudyConfig(
        distribution=dist,
        alpha=float(raw["alpha"]),
        lam=float(raw["lambda"]),
        q=(float(q) if q is not None else None),
        sample_sizes=tuple(int(n) for n in sizes),
        replications=reps,
        methods=tuple(methods),
        master_seed=seed,
        parallelism=par,
    )


# ---------------------------------------------------------------------------
# Report documents
# ---------------------------------------------------------------------------

def _params_dict(params) -> dict:
    out = {"alpha": params.alpha, "lambda": params.lam}
    if isinstance(params, TlqeParams):
        out["q"] = params.q
    return out


def _support_dict(params) -> dict:
    sup = support(params)
    return {"lower": sup.lower,
            "upper": (sup.upper if math.isfinite(sup.upper) else None)}


def _fit_document(result: FitResult, dist: str, invocation) -> dict:
    return {
        "tool": "toppleone",
        "version": __version__,
        "invocation": list(invocation),
        "report": {
            "distribution": dist,
            "method": result.method.value,
            "n": result.n,
            "converged": result.converged,
            "objective_value": result.objective_value,
            "stationarity_norm": result.stationarity_norm,
            "params": _params_dict(result.params),
            "support": _support_dict(result.params),
        },
    }


def _fit_csv(result: FitResult, dist: str) -> str:
    q = result.params.q if isinstance(result.params, TlqeParams) else None
    rows = [
        ["distribution", "method", "n", "converged", "objective_value",
         "stationarity_norm", "alpha", "lambda", "q"],
        [dist, result.method.value, result.n, result.converged,
         result.objective_value, result.stationarity_norm,
         result.params.alpha, result.params.lam, q],
    ]
    return _write_csv(rows)


def _study_config_echo(cfg: StudyConfig) -> dict:
    # parallelism is deliberately omitted: the report must be identical
    # for every --parallel value
    out = {
        "distribution": cfg.distribution,
        "alpha": cfg.alpha,
        "lambda": cfg.lam,
    }
    if cfg.q is not None:
        out["q"] = cfg.q
    out.update({
        "sample_sizes": list(cfg.sample_sizes),
        "replications": cfg.replications,
        "methods": list(cfg.methods),
        "master_seed": cfg.master_seed,
    })
    return out


def _study_document(report: StudyReport, invocation) -> dict:
    cells = []
    for cell in report.cells:
        cells.append({
            "method": cell.method,
            "n": cell.n,
            "replications": cell.replications,
            "failures": cell.failures,
            "failure_rate": cell.failure_rate,
            "estimates": {
                name: {"truth": st.truth, "mean": st.mean,
                       "bias": st.bias, "mse": st.mse}
                for name, st in cell.estimates.items()
            },
        })
    return {
        "tool": "toppleone",
        "version": __version__,
        "invocation": list(invocation),
        "config": _study_config_echo(report.config),
        "cells": cells,
    }


def _study_csv(report: StudyReport) -> str:
    rows = [["method", "n", "replications", "failures", "failure_rate",
             "parameter", "truth", "mean", "bias", "mse"]]
    for cell in report.cells:
        for name, st in cell.estimates.items():
            rows.append([cell.method, cell.n, cell.replications,
                         cell.failures, cell.failure_rate, name,
                         st.truth, st.mean, st.bias, st.mse])
    return _write_csv(rows)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _build_params(args):
    if args.dist == "tlqe":
        if args.q is None:
            raise CliInputError("--q is required with --dist tlqe")
        return TlqeParams(args.alpha, args.lam, args.q)
    if args.q is not None:
        raise CliInputError("--q is only valid with --dist tlqe")
    return TleParams(args.alpha, args.lam)


def _cmd_fit(args, invocation) -> int:
    obs = read_observations(args.data)
    if obs.size < 3:
        raise CliInputError(
            f"{args.data}: need at least 3 observations to fit, got {obs.size}")
    smp = SortedSample.from_values(obs)
    cfg = OptimizerConfig(starts=args.starts, seed=args.seed)
    try:
        result = fit(FitRequest(smp, args.dist, Method(args.method), cfg))
    except NoFeasibleStartError as exc:
        raise CliInputError(str(exc))
    if args.out == "csv":
        sys.stdout.write(_fit_csv(result, args.dist))
    else:
        sys.stdout.write(dumps_json(_fit_document(result, args.dist, invocation)) + "\n")
    return 0 if result.converged else 2


def _cmd_sample(args, invocation) -> int:
    params = _build_params(args)
    if args.n < 1:
        raise CliInputError("--n must be >= 1")
    smp = sample(args.n, params, args.seed)
    out = "".join(format_float(v) + "\n" for v in smp.values)
    sys.stdout.write(out)
    return 0


def _cmd_eval(args, invocation) -> int:
    params = _build_params(args)
    if args.fn in ("cdf", "pdf"):
        if args.x is None:
            raise CliInputError(f"--x is required for --fn {args.fn}")
        if args.u is not None:
            raise CliInputError(f"--u is not valid for --fn {args.fn}")
        if args.dist == "tlqe":
            value = (cdf_tlqe if args.fn == "cdf" else pdf_tlqe)(args.x, params)
        else:
            value = (cdf_tle if args.fn == "cdf" else pdf_tle)(args.x, params)
    else:
        if args.u is None:
            raise CliInputError("--u is required for --fn quantile")
        if args.x is not None:
            raise CliInputError("--x is not valid for --fn quantile")
        if args.dist == "tlqe":
            value = quantile_tlqe(args.u, params)
        else:
            value = quantile_tle(args.u, params)
    sys.stdout.write(format_float(value) + "\n")
    return 0


def _strip_parallel(invocation):
    out = []
    skip = False
    for tok in invocation:
        if skip:
            skip = False
            continue
        if tok == "--parallel":
            skip = True
            continue
        if tok.startswith("--parallel="):
            continue
        out.append(tok)
    return out


def _cmd_study(args, invocation) -> int:
    cfg = load_study_config(args.config)
    if args.parallel is not None:
        if args.parallel < 1:
            raise CliInputError("--parallel must be >= 1")
        cfg = replace(cfg, parallelism=args.parallel)
    report = run_study(cfg)
    if args.out == "csv":
        sys.stdout.write(_study_csv(report))
    else:
        doc = _study_document(report, _strip_parallel(invocation))
        sys.stdout.write(dumps_json(doc) + "\n")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="toppleone",
                     description="Topp-Leone exponential and q-exponential "
                                 "distributions: evaluate, sample, fit, and "
                                 "run estimator comparison studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit parameters to a data file")
    p_fit.add_argument("--dist", required=True, choices=["tle", "tlqe"])
    p_fit.add_argument("--method", required=True,
                       choices=["ls", "wls", "cvm", "ad", "ml"])
    p_fit.add_argument("--data", required=True, help="one observation per line")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--starts", type=int, default=8)
    p_fit.add_argument("--out", choices=["json", "csv"], default="json")

    p_sample = sub.add_parser("sample", help="draw a sorted sample")
    p_sample.add_argument("--dist", required=True, choices=["tle", "tlqe"])
    p_sample.add_argument("--alpha", type=float, required=True)
    p_sample.add_argument("--lambda", type=float, required=True, dest="lam")
    p_sample.add_argument("--q", type=float, default=None)
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, default=0)

    p_eval = sub.add_parser("eval", help="evaluate cdf, pdf, or quantile")
    p_eval.add_argument("--dist", required=True, choices=["tle", "tlqe"])
    p_eval.add_argument("--alpha", type=float, required=True)
    p_eval.add_argument("--lambda", type=float, required=True, dest="lam")
    p_eval.add_argument("--q", type=float, default=None)
    p_eval.add_argument("--fn", required=True, choices=["cdf", "pdf", "quantile"])
    p_eval.add_argument("--x", type=float, default=None)
    p_eval.add_argument("--u", type=float, default=None)

    p_study = sub.add_parser("study", help="run a Monte Carlo estimator study")
    p_study.add_argument("--config", required=True, help="study config JSON")
    p_study.add_argument("--parallel", type=int, default=None)
    p_study.add_argument("--out", choices=["json", "csv"], default="json")

    return parser


_COMMANDS = {
    "fit": _cmd_fit,
    "sample": _cmd_sample,
    "eval": _cmd_eval,
    "study": _cmd_study,
}


def main(argv=None) -> int:
    invocation = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(invocation)
        return _COMMANDS[args.command](args, invocation)
    except CliInputError as exc:
        print(f"toppleone: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"toppleone: error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())
