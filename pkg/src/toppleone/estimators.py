"""User-facing fitting API tying samples, objectives, and the optimizer.

Five methods: the four minimum-distance objectives plus a maximum
likelihood baseline (ML is estimation plumbing for the simulation
harness, not one of the distance objectives).  Every method runs the
same multi-start minimizer over transformed parameters and reports the
gradient norm at the fitted point.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .data import SortedSample
from .distributions import Params, TleParams, TlqeParams, _is_q_one
from .numerics import log1mexp
from .objectives import (INFEASIBLE, ObjectiveKind, ObjectiveValue,
                         is_feasible, objective_value)
from .optimize import (OptimizerConfig, ParamSpace, default_initial_guesses,
                       minimize)

__all__ = ["Method", "FitRequest", "FitResult", "fit", "fit_mle"]

# fitted q values this close to 1 are reported as exactly 1 and refit
# on the TLE path
_Q_SNAP = 1e-6


class Method(enum.Enum):
    LS = "ls"
    WLS = "wls"
    CVM = "cvm"
    AD = "ad"
    ML = "ml"

    @property
    def objective_kind(self):
        return None if self is Method.ML else ObjectiveKind(self.value)


@dataclass(frozen=True)
class FitRequest:
    sample: SortedSample
    distribution: str  # "tle" | "tlqe"
    method: Method
    optimizer: OptimizerConfig = OptimizerConfig()

    def __post_init__(self):
        if self.distribution not in ("tle", "tlqe"):
            raise ValueError(
                f"distribution must be 'tle' or 'tlqe', got {self.distribution!r}")


@dataclass(frozen=True)
class FitResult:
    params: Params
    objective_value: float
    method: Method
    converged: bool
    stationarity_norm: float
    n: int


# ---------------------------------------------------------------------------
# Negative log-likelihood with analytic gradient
# ---------------------------------------------------------------------------

def _neg_loglik_tle(s: SortedSample, p: TleParams, want_grad: bool) -> ObjectiveValue:
    xs = s.values
    alpha, lam = p.alpha, p.lam
    t = 2.0 * lam * xs
    log_u = log1mexp(-t)
    if alpha == 1.0:
        w = np.zeros_like(log_u)
    else:
        with np.errstate(invalid="ignore"):
            w = (alpha - 1.0) * log_u
    value = -(s.n * math.log(2.0 * alpha * lam) - np.sum(t) + np.sum(w))
    if not math.isfinite(value):
        # an observation with zero (or unbounded) density; reject the point
        return ObjectiveValue(math.inf, None, True)
    if not want_grad:
        return ObjectiveValue(float(value), None, True)
    u = -np.expm1(-t)
    et = np.exp(-t)
    if alpha == 1.0:
        shape_pull = 0.0
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            shape_pull = (alpha - 1.0) * 2.0 * float(np.sum(xs * et / u))
    d_lam = s.n / lam - 2.0 * float(np.sum(xs)) + shape_pull
    d_alpha = s.n / alpha + float(np.sum(log_u))
    grad = -np.array([d_lam, d_alpha])
    if not np.all(np.isfinite(grad)):
        return ObjectiveValue(float(value), None, True)
    return ObjectiveValue(float(value), grad, True)


def _neg_loglik_tlqe(s: SortedSample, p: TlqeParams, want_grad: bool) -> ObjectiveValue:
    if not is_feasible(s, p):
        return INFEASIBLE
    xs = s.values
    alpha, lam, q = p.alpha, p.lam, p.q
    lx = lam * xs
    if _is_q_one(q):
        base = _neg_loglik_tle(s, TleParams(alpha, lam), want_grad)
        if not want_grad or base.gradient is None:
            return base
        t = 2.0 * lx
        u = -np.expm1(-t)
        with np.errstate(divide="ignore", invalid="ignore"):
            d_q = (float(np.sum(-1.0 + lx + lx * lx))
                   - (alpha - 1.0)
                   * float(np.sum(np.exp(-t) * (2.0 * lx + lx * lx) / u)))
        if not math.isfinite(d_q):
            return ObjectiveValue(base.value, None, True)
        return ObjectiveValue(base.value,
                              np.append(base.gradient, -d_q), True)
    k = 2.0 * (2.0 - q) / (1.0 - q)
    e3 = (3.0 - q) / (1.0 - q)
    psi = 1.0 - (1.0 - q) * lx
    with np.errstate(divide="ignore"):
        log_psi = np.log1p(-np.minimum((1.0 - q) * lx, 1.0))
    log_u = log1mexp(k * log_psi)
    if alpha == 1.0:
        w = np.zeros_like(log_u)
    else:
        with np.errstate(invalid="ignore"):
            w = (alpha - 1.0) * log_u
    value = -(s.n * math.log(2.0 * alpha * lam * (2.0 - q))
              + e3 * np.sum(log_psi) + np.sum(w))
    if not math.isfinite(value):
        return ObjectiveValue(math.inf, None, True)
    if not want_grad:
        return ObjectiveValue(float(value), None, True)
    with np.errstate(over="ignore", divide="ignore"):
        u = -np.expm1(k * log_psi)
        psi_km1_over_u = np.exp((k - 1.0) * log_psi - np.log(u))
        psi_k_over_u = np.exp(k * log_psi - np.log(u))
        bracket = 2.0 * log_psi / (1.0 - q) ** 2 + k * lx / psi
    d_lam = (s.n / lam - (3.0 - q) * float(np.sum(xs / psi))
             + (alpha - 1.0) * 2.0 * (2.0 - q) * float(np.sum(xs * psi_km1_over_u)))
    d_alpha = s.n / alpha + float(np.sum(log_u))
    d_q = (-s.n / (2.0 - q)
           + float(np.sum(2.0 * log_psi / (1.0 - q) ** 2 + e3 * lx / psi))
           - (alpha - 1.0) * float(np.sum(psi_k_over_u * bracket)))
    grad = -np.array([d_lam, d_alpha, d_q])
    if not np.all(np.isfinite(grad)):
        return ObjectiveValue(float(value), None, True)
    return ObjectiveValue(float(value), grad, True)


def _build_objective(method: Method, s: SortedSample, distribution: str):
    if method is Method.ML:
        if distribution == "tlqe":
            return lambda p, gradient=True: _neg_loglik_tlqe(s, p, gradient)
        return lambda p, gradient=True: _neg_loglik_tle(s, p, gradient)
    kind = method.objective_kind
    return lambda p, gradient=True: objective_value(kind, s, p, gradient)


def _ml_value_closure(s: SortedSample, distribution: str):
    """Value-only likelihood path; same floats as _neg_loglik_*."""
    xs = s.values
    n = s.n
    x_max = float(xs[-1])
    inf = math.inf
    log = math.log

    def f_tle(lam, alpha):
        t = 2.0 * lam * xs
        log_u = log1mexp_raw(-t)
        if alpha == 1.0:
            w_sum = 0.0
        else:
            w_sum = float(np.sum((alpha - 1.0) * log_u))
        value = -(n * log(2.0 * alpha * lam) - np.sum(t) + w_sum)
        return float(value) if math.isfinite(value) else inf

    if distribution == "tle":
        return f_tle

    def f_tlqe(lam, alpha, q):
        if _is_q_one(q):
            return f_tle(lam, alpha)
        if q < 1.0 and (1.0 - q) * (lam * x_max) >= 1.0:
            return inf
        lx = lam * xs
        log_psi = np.log1p(-np.minimum((1.0 - q) * lx, 1.0))
        log_u = log1mexp_raw((2.0 * (2.0 - q) / (1.0 - q)) * log_psi)
        if alpha == 1.0:
            w_sum = 0.0
        else:
            w_sum = float(np.sum((alpha - 1.0) * log_u))
        value = -(n * log(2.0 * alpha * lam * (2.0 - q))
                  + (3.0 - q) / (1.0 - q) * np.sum(log_psi) + w_sum)
        return float(value) if math.isfinite(value) else inf

    return f_tlqe


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def fit(req: FitRequest) -> FitResult:
    """Fit the requested distribution by the requested method.

    Deterministic given the optimizer seed.  Rejects samples with fewer
    than 3 observations (fewer points than parameters + 1 leaves the
    objective surface degenerate).  TLqE fits landing within 1e-6 of
    q = 1 are refit on the TLE path and reported with q exactly 1.
    """
    n = req.sample.n
    if n < 3:
        raise ValueError(f"need at least 3 observations to fit, got {n}")
    objective = _build_objective(req.method, req.sample, req.distribution)
    space = ParamSpace(req.distribution)
    guesses = default_initial_guesses(req.sample, req.distribution,
                                      starts=req.optimizer.starts,
                                      seed=req.optimizer.seed)
    outcome = minimize(objective, space, req.optimizer, guesses)
    params = outcome.best_params

    if isinstance(params, TlqeParams) and abs(params.q - 1.0) < _Q_SNAP:
        sub = fit(replace(req, distribution="tle"))
        return FitResult(
            params=TlqeParams(sub.params.alpha, sub.params.lam, 1.0),
            objective_value=sub.objective_value,
            method=req.method,
            converged=sub.converged,
            stationarity_norm=sub.stationarity_norm,
            n=n,
        )

    ov = objective(params, gradient=True)
    stationarity = (float(np.linalg.norm(ov.gradient))
                    if ov.gradient is not None else math.nan)
    return FitResult(
        params=params,
        objective_value=outcome.best_value,
        method=req.method,
        converged=outcome.converged,
        stationarity_norm=stationarity,
        n=n,
    )


def fit_mle(req: FitRequest) -> FitResult:
    """Maximum-likelihood fit through the same optimizer pipeline."""
    if req.method is not Method.ML:
        req = replace(req, method=Method.ML)
    return fit(req)
