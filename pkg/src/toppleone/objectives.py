"""Minimum-distance objectives over a sorted sample.

Four discrepancy functions between the model CDF at the order statistics
and their plotting positions:

    LS   sum_i [F(x_(i)) - i/(n+1)]^2
    WLS  sum_i w_i [F(x_(i)) - i/(n+1)]^2,  w_i = (n+1)^2 (n+2) / (i (n-i+1))
    CvM  1/(12n) + sum_i [F(x_(i)) - (2i-1)/(2n)]^2
    AD   -n - (1/n) sum_i (2i-1) { log F(x_(i)) + log[1 - F(x_(n+1-i))] }

Every objective carries an analytic gradient with respect to the
distribution parameters, ordered (lam, alpha) for TLE and (lam, alpha, q)
for TLqE.  The gradients are derived from the definitions above (not
transcribed) and are gated by finite-difference tests; for the TLqE
q-derivative the key quantities are psi = 1-(1-q)*lam*x and

    d/dq psi^k = psi^k [ 2 log(psi)/(1-q)^2 + k*lam*x/psi ],
    k = 2(2-q)/(1-q),

with the q -> 1 limit d/dq psi^k -> exp(-2*lam*x) * (2*lam*x + (lam*x)^2).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .data import SortedSample
from .distributions import Params, TleParams, TlqeParams, _is_q_one
from .numerics import LOG_TINY, log1mexp

__all__ = [
    "ObjectiveKind",
    "ObjectiveValue",
    "objective_value",
    "ls_value",
    "wls_value",
    "cvm_value",
    "ad_value",
    "gradient",
    "is_feasible",
]


class ObjectiveKind(enum.Enum):
    """The four estimation objectives."""

    LS = "ls"
    WLS = "wls"
    CVM = "cvm"
    AD = "ad"


@dataclass(frozen=True, eq=False)
class ObjectiveValue:
    """Objective value, analytic gradient, and feasibility flag.

    Infeasible parameter/sample pairs (an observation outside the
    support implied by the parameters) carry value = +inf and no
    gradient.
    """

    value: float
    gradient: Optional[np.ndarray]
    feasible: bool


INFEASIBLE = ObjectiveValue(math.inf, None, False)


@lru_cache(maxsize=256)
def _order_constants(n: int):
    i = np.arange(1, n + 1, dtype=np.float64)
    pp = i / (n + 1.0)                                   # LS/WLS positions
    w = (n + 1.0) ** 2 * (n + 2.0) / (i * (n - i + 1.0))  # WLS weights
    cp = (2.0 * i - 1.0) / (2.0 * n)                     # CvM positions
    ad_lo = 2.0 * i - 1.0                                # weight on log F_(i)
    ad_hi = 2.0 * (n - i) + 1.0                          # weight on log(1-F_(i))
    for a in (pp, w, cp, ad_lo, ad_hi):
        a.setflags(write=False)
    return pp, w, cp, ad_lo, ad_hi


def is_feasible(s: SortedSample, p: Params) -> bool:
    """True unless a TLqE with q < 1 puts the largest observation at or
    beyond the finite support endpoint (lam*(1-q)*x_(n) >= 1)."""
    if isinstance(p, TlqeParams) and p.q < 1.0 and not _is_q_one(p.q):
        # grouped exactly like psi = 1 - (1-q)*(lam*x) in the bundles, so
        # feasible points always see psi > 0
        return (1.0 - p.q) * (p.lam * s.values[-1]) < 1.0
    return True


# ---------------------------------------------------------------------------
# CDF bundles: F, log F, log(1-F), and parameter partials at the sample
# ---------------------------------------------------------------------------

def _pow_log(c: float, logs: np.ndarray) -> np.ndarray:
    """exp(c * logs) with the 0 * (-inf) case pinned to 1."""
    if c == 0.0:
        return np.ones_like(logs)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(c * logs)


def _tle_parts(xs: np.ndarray, alpha: float, lam: float, want_grad: bool):
    t = 2.0 * lam * xs
    log_u = log1mexp(-t)
    log_F = alpha * log_u
    F = np.exp(log_F)
    log_sf = log1mexp(log_F)
    if not want_grad:
        return F, log_F, log_sf, None
    u_am1 = _pow_log(alpha - 1.0, log_u)
    with np.errstate(over="ignore"):
        dF_dlam = alpha * u_am1 * 2.0 * xs * np.exp(-t)
    dF_dalpha = F * log_u
    return F, log_F, log_sf, [dF_dlam, dF_dalpha]


def _tlqe_parts(xs: np.ndarray, p: TlqeParams, want_grad: bool):
    alpha, lam, q = p.alpha, p.lam, p.q
    if _is_q_one(q):
        F, log_F, log_sf, grads = _tle_parts(xs, alpha, lam, want_grad)
        if not want_grad:
            return F, log_F, log_sf, None
        lx = lam * xs
        t = 2.0 * lx
        log_u = log1mexp(-t)
        u_am1 = _pow_log(alpha - 1.0, log_u)
        du_dq = -np.exp(-t) * (2.0 * lx + lx * lx)
        dF_dq = alpha * u_am1 * du_dq
        return F, log_F, log_sf, grads + [dF_dq]
    k = 2.0 * (2.0 - q) / (1.0 - q)
    lx = lam * xs
    psi = 1.0 - (1.0 - q) * lx
    with np.errstate(divide="ignore"):
        log_psi = np.log1p(-np.minimum((1.0 - q) * lx, 1.0))
    log_u = log1mexp(k * log_psi)
    log_F = alpha * log_u
    F = np.exp(log_F)
    log_sf = log1mexp(log_F)
    if not want_grad:
        return F, log_F, log_sf, None
    u_am1 = _pow_log(alpha - 1.0, log_u)
    psi_km1 = _pow_log(k - 1.0, log_psi)
    with np.errstate(over="ignore"):
        dF_dlam = alpha * u_am1 * 2.0 * (2.0 - q) * xs * psi_km1
    dF_dalpha = F * log_u
    psi_k = _pow_log(k, log_psi)
    with np.errstate(divide="ignore", invalid="ignore"):
        bracket = 2.0 * log_psi / (1.0 - q) ** 2 + k * lx / psi
    dF_dq = -alpha * u_am1 * psi_k * bracket
    return F, log_F, log_sf, [dF_dlam, dF_dalpha, dF_dq]


def _cdf_parts(xs: np.ndarray, p: Params, want_grad: bool):
    if isinstance(p, TlqeParams):
        return _tlqe_parts(xs, p, want_grad)
    return _tle_parts(xs, p.alpha, p.lam, want_grad)


# ---------------------------------------------------------------------------
# Objective evaluation
# ---------------------------------------------------------------------------

def objective_value(kind: ObjectiveKind, s: SortedSample, p: Params,
                    gradient: bool = True) -> ObjectiveValue:
    """Evaluate one objective (optionally with its analytic gradient)."""
    if not is_feasible(s, p):
        return INFEASIBLE
    n = s.n
    xs = s.values
    pp, w, cp, ad_lo, ad_hi = _order_constants(n)
    F, log_F, log_sf, dF = _cdf_parts(xs, p, gradient)

    if kind is ObjectiveKind.AD:
        # log F clamped at the smallest-normal floor; clamped terms are
        # treated as constants, so their gradient contribution is zero
        logF_cl = np.maximum(log_F, LOG_TINY)
        logsf_cl = np.maximum(log_sf, LOG_TINY)
        value = -n - (ad_lo @ logF_cl + ad_hi @ logsf_cl) / n
        if not gradient:
            return ObjectiveValue(float(value), None, True)
        with np.errstate(divide="ignore", over="ignore"):
            coef = (np.where(log_F > LOG_TINY, ad_lo / F, 0.0)
                    - np.where(log_sf > LOG_TINY, ad_hi / np.exp(log_sf), 0.0))
        g = np.array([-(coef @ d) / n for d in dF])
        return ObjectiveValue(float(value), g, True)

    if kind is ObjectiveKind.LS:
        r = F - pp
        value = r @ r
        scale = r
    elif kind is ObjectiveKind.WLS:
        r = F - pp
        scale = w * r
        value = scale @ r
    elif kind is ObjectiveKind.CVM:
        r = F - cp
        value = 1.0 / (12.0 * n) + r @ r
        scale = r
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown objective kind: {kind}")
    if not gradient:
        return ObjectiveValue(float(value), None, True)
    g = np.array([2.0 * (scale @ d) for d in dF])
    return ObjectiveValue(float(value), g, True)


def ls_value(s: SortedSample, p: Params, gradient: bool = True) -> ObjectiveValue:
    """Least-squares distance between model CDF and plotting positions."""
    return objective_value(ObjectiveKind.LS, s, p, gradient)


def wls_value(s: SortedSample, p: Params, gradient: bool = True) -> ObjectiveValue:
    """Weighted least-squares distance; weights (n+1)^2(n+2)/(i(n-i+1))."""
    return objective_value(ObjectiveKind.WLS, s, p, gradient)


def cvm_value(s: SortedSample, p: Params, gradient: bool = True) -> ObjectiveValue:
    """Cramer-von Mises distance, bounded below by 1/(12n)."""
    return objective_value(ObjectiveKind.CVM, s, p, gradient)


def ad_value(s: SortedSample, p: Params, gradient: bool = True) -> ObjectiveValue:
    """Anderson-Darling statistic; log terms clamped so it never NaNs."""
    return objective_value(ObjectiveKind.AD, s, p, gradient)


def gradient(kind: ObjectiveKind, s: SortedSample, p: Params) -> np.ndarray:
    """Analytic gradient of the selected objective at (s, p).

    Ordered (d/dlam, d/dalpha) for TLE parameters and
    (d/dlam, d/dalpha, d/dq) for TLqE parameters.  Raises ValueError on
    infeasible inputs, where no gradient exists.
    """
    ov = objective_value(kind, s, p, gradient=True)
    if not ov.feasible:
        raise ValueError("gradient undefined: sample infeasible for parameters")
    return ov.gradient


# ---------------------------------------------------------------------------
# Value-only closures for the optimizer hot loop
# ---------------------------------------------------------------------------
#
# These run the same floating-point operations as objective_value (so
# the attained values agree bit-for-bit) but skip the dataclass,
# dispatch, and gradient machinery.  Callers are expected to hold an
# np.errstate guard around the whole optimization loop.

from .numerics import log1mexp_raw  # noqa: E402  (hot-path import)
from .distributions import Q_ONE_EPS  # noqa: E402


def value_closure(kind: ObjectiveKind, s: SortedSample, dist_kind: str):
    """Build f(lam, alpha[, q]) -> float matching objective_value()."""
    xs = s.values
    n = s.n
    pp, w, cp, ad_lo, ad_hi = _order_constants(n)
    x_max = float(xs[-1])
    inf = math.inf

    def finish(F, log_F, log_u):
        if kind is ObjectiveKind.LS:
            r = F - pp
            return float(r @ r)
        if kind is ObjectiveKind.WLS:
            r = F - pp
            return float((w * r) @ r)
        if kind is ObjectiveKind.CVM:
            r = F - cp
            return float(1.0 / (12.0 * n) + r @ r)
        log_sf = log1mexp_raw(log_F)
        return float(-n - (ad_lo @ np.maximum(log_F, LOG_TINY)
                           + ad_hi @ np.maximum(log_sf, LOG_TINY)) / n)

    if dist_kind == "tle":
        def f(lam, alpha):
            t = 2.0 * lam * xs
            log_u = log1mexp_raw(-t)
            log_F = alpha * log_u
            return finish(np.exp(log_F), log_F, log_u)
        return f

    def f(lam, alpha, q):
        if abs(1.0 - q) < Q_ONE_EPS:
            t = 2.0 * lam * xs
            log_u = log1mexp_raw(-t)
        else:
            if q < 1.0 and (1.0 - q) * (lam * x_max) >= 1.0:
                return inf
            k = 2.0 * (2.0 - q) / (1.0 - q)
            lx = lam * xs
            log_psi = np.log1p(-np.minimum((1.0 - q) * lx, 1.0))
            log_u = log1mexp_raw(k * log_psi)
        log_F = alpha * log_u
        return finish(np.exp(log_F), log_F, log_u)
    return f
