"""Topp-Leone exponential (TLE) and Topp-Leone q-exponential (TLqE) laws.

Both distributions arise from the Topp-Leone transform of a parent CDF G,

    F(x) = G(x)^a * (2 - G(x))^a = (1 - (1 - G(x))^2)^a,

which adds a shape parameter ``a`` to the parent family.  With an
exponential parent (rate ``lam``) the transform collapses to

    F_TLE(x) = (1 - exp(-2*lam*x))^a,

and with a q-exponential parent (survival (1-(1-q)*lam*x)^((2-q)/(1-q)))
it collapses to

    F_TLqE(x) = (1 - (1 - (1-q)*lam*x)^(2*(2-q)/(1-q)))^a.

The deformation q < 2 controls the tail: q -> 1 recovers the TLE law,
1 < q < 2 gives power-law tails, and q < 1 truncates the support to the
finite interval [0, 1/((1-q)*lam)].  All evaluation goes through
expm1/log1p so that log-CDF values stay accurate near both endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .data import SortedSample
from .numerics import log1mexp
from .seeds import generator

__all__ = [
    "TleParams",
    "TlqeParams",
    "Support",
    "Params",
    "tl_transform_cdf",
    "exponential_cdf",
    "qexponential_cdf",
    "cdf_tle",
    "pdf_tle",
    "quantile_tle",
    "cdf_tlqe",
    "pdf_tlqe",
    "quantile_tlqe",
    "support",
    "sample",
]

# Width of the sliver around q = 1 evaluated through the exponential
# limit.  Inside it the TLqE code paths return TLE values exactly.
Q_ONE_EPS = 1e-8


def _is_q_one(q: float) -> bool:
    return abs(1.0 - q) < Q_ONE_EPS


@dataclass(frozen=True)
class TleParams:
    """Shape ``alpha`` and rate ``lam`` of the Topp-Leone exponential."""

    alpha: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError(f"alpha must be a positive real, got {self.alpha}")
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lam must be a positive real, got {self.lam}")


@dataclass(frozen=True)
class TlqeParams:
    """Shape ``alpha``, rate ``lam``, and deformation ``q`` (q < 2).

    q = 2 is rejected because the density's normalizing factor (2 - q)
    vanishes there.  q = 0 and q = 1 are both admitted; the q = 1 case
    is evaluated through its exponential limit.
    """

    alpha: float
    lam: float
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError(f"alpha must be a positive real, got {self.alpha}")
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lam must be a positive real, got {self.lam}")
        if not (math.isfinite(self.q) and self.q < 2.0):
            raise ValueError(f"q must be a real number below 2, got {self.q}")


Params = Union[TleParams, TlqeParams]


@dataclass(frozen=True)
class Support:
    """Closed-below interval on which a density lives; upper may be inf."""

    lower: float
    upper: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.upper)


def support(p: Params) -> Support:
    """Support of the distribution: [0, inf) except for TLqE with q < 1,
    where the bracket 1-(1-q)*lam*x pins the upper endpoint to
    1/((1-q)*lam)."""
    if isinstance(p, TlqeParams) and p.q < 1.0 and not _is_q_one(p.q):
        return Support(0.0, 1.0 / ((1.0 - p.q) * p.lam))
    return Support(0.0, math.inf)


def _asarray_checked(x, name: str, lower=0.0):
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < lower):
        raise ValueError(f"{name} must be >= {lower}")
    return arr


def _scalarize(out: np.ndarray, scalar: bool):
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Topp-Leone transform and parent CDFs
# ---------------------------------------------------------------------------

def tl_transform_cdf(g, alpha: float):
    """Topp-Leone transform of a parent CDF value: g^alpha * (2-g)^alpha.

    Evaluated as exp(alpha * log(1 - (1-g)^2)) with the squared survival
    handled in log space, so the result stays accurate for g near 0.
    """
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise ValueError(f"alpha must be a positive real, got {alpha}")
    garr = np.asarray(g, dtype=np.float64)
    scalar = garr.ndim == 0
    garr = np.atleast_1d(garr)
    if np.any(np.isnan(garr)) or np.any(garr < 0.0) or np.any(garr > 1.0):
        raise ValueError("g must lie in [0, 1]")
    log_u = log1mexp(2.0 * np.log1p(-garr))
    out = np.exp(alpha * log_u)
    return _scalarize(out[0] if scalar else out, scalar)


def exponential_cdf(x, lam: float):
    """CDF of the exponential distribution with rate ``lam``."""
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValueError(f"lam must be a positive real, got {lam}")
    arr = _asarray_checked(x, "x")
    return _scalarize(-np.expm1(-lam * arr), arr.ndim == 0)


def _qexp_double_log_sf(x: np.ndarray, lam: float, q: float) -> np.ndarray:
    """2 * log-survival of the q-exponential parent, i.e. k*log(psi) with
    psi = 1-(1-q)*lam*x and k = 2*(2-q)/(1-q); exponential limit at q ~ 1.

    Requires (1-q)*lam*x <= 1 elementwise (callers mask the rest).
    """
    if _is_q_one(q):
        return -2.0 * lam * x
    k = 2.0 * (2.0 - q) / (1.0 - q)
    # clip guards against (1-q)*lam*x rounding past 1 just inside a
    # finite upper endpoint (log1p would return nan there)
    with np.errstate(divide="ignore"):
        return k * np.log1p(-np.minimum((1.0 - q) * lam * x, 1.0))


def qexponential_cdf(x, lam: float, q: float):
    """CDF of the q-exponential distribution (1 for x past a finite end)."""
    p = TlqeParams(1.0, lam, q)  # reuse validation; alpha unused
    arr = _asarray_checked(x, "x")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if _is_q_one(q):
        out = -np.expm1(-lam * arr)
        return _scalarize(out[0] if scalar else out, scalar)
    upper = support(p).upper
    inside = arr < upper
    x_eff = np.where(inside, arr, 0.0)
    half_log_sf = 0.5 * _qexp_double_log_sf(x_eff, lam, q)
    out = np.where(inside, -np.expm1(half_log_sf), 1.0)
    return _scalarize(out[0] if scalar else out, scalar)


# ---------------------------------------------------------------------------
# TLE
# ---------------------------------------------------------------------------

def cdf_tle(x, p: TleParams):
    """TLE CDF (1 - exp(-2*lam*x))^alpha.

    Shares its evaluation path with ``exponential_cdf(x, 2*lam)`` so the
    alpha = 1 reduction to the exponential law with rate 2*lam is exact.
    """
    arr = _asarray_checked(x, "x")
    u = np.asarray(exponential_cdf(arr, 2.0 * p.lam))
    return _scalarize(u**p.alpha, arr.ndim == 0)


def pdf_tle(x, p: TleParams):
    """TLE density 2*alpha*lam*exp(-2*lam*x)*(1-exp(-2*lam*x))^(alpha-1)."""
    arr = _asarray_checked(x, "x")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    t = 2.0 * p.lam * arr
    log_u = log1mexp(-t)
    if p.alpha == 1.0:
        w = np.zeros_like(log_u)
    else:
        with np.errstate(invalid="ignore"):
            w = (p.alpha - 1.0) * log_u
    with np.errstate(over="ignore"):
        out = 2.0 * p.alpha * p.lam * np.exp(w - t)
    return _scalarize(out[0] if scalar else out, scalar)


def _quantile_tle_raw(u: np.ndarray, p: TleParams) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_one_minus_root = log1mexp(np.log(u) / p.alpha)
    return -log_one_minus_root / (2.0 * p.lam)


def quantile_tle(u, p: TleParams):
    """TLE quantile -log(1 - u^(1/alpha)) / (2*lam) for u in (0, 1)."""
    arr = np.asarray(u, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(np.isnan(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    out = _quantile_tle_raw(arr, p)
    return _scalarize(out[0] if scalar else out, scalar)


# ---------------------------------------------------------------------------
# TLqE
# ---------------------------------------------------------------------------

def cdf_tlqe(x, p: TlqeParams):
    """TLqE CDF (1 - (1-(1-q)*lam*x)^(2*(2-q)/(1-q)))^alpha.

    Returns exactly 1 for x at or past a finite upper endpoint.  Inside
    the q = 1 sliver the TLE value is returned bit-for-bit.
    """
    arr = _asarray_checked(x, "x")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if _is_q_one(p.q):
        out = np.asarray(cdf_tle(arr, TleParams(p.alpha, p.lam)))
        return _scalarize(out[0] if scalar else out, scalar)
    upper = support(p).upper
    inside = arr < upper
    x_eff = np.where(inside, arr, 0.0)
    u = -np.expm1(_qexp_double_log_sf(x_eff, p.lam, p.q))
    out = np.where(inside, u**p.alpha, 1.0)
    return _scalarize(out[0] if scalar else out, scalar)


def pdf_tlqe(x, p: TlqeParams):
    """TLqE density 2*alpha*lam*(2-q) * psi^((3-q)/(1-q)) * u^(alpha-1)
    with psi = 1-(1-q)*lam*x and u = 1-psi^(2*(2-q)/(1-q)).

    Raises for x outside [0, upper]; a finite upper endpoint itself maps
    to the one-sided limit 0 so that quadrature can touch the boundary.
    """
    if _is_q_one(p.q):
        return pdf_tle(x, TleParams(p.alpha, p.lam))
    arr = _asarray_checked(x, "x")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    upper = support(p).upper
    if np.any(arr > upper):
        raise ValueError("x outside the distribution support")
    at_end = arr == upper
    x_eff = np.where(at_end, 0.0, arr)
    with np.errstate(divide="ignore"):
        log_psi = np.log1p(-np.minimum((1.0 - p.q) * p.lam * x_eff, 1.0))
    log_u = log1mexp((2.0 * (2.0 - p.q) / (1.0 - p.q)) * log_psi)
    if p.alpha == 1.0:
        w = np.zeros_like(log_u)
    else:
        with np.errstate(invalid="ignore"):
            w = (p.alpha - 1.0) * log_u
    with np.errstate(over="ignore"):
        out = (2.0 * p.alpha * p.lam * (2.0 - p.q)
               * np.exp((3.0 - p.q) / (1.0 - p.q) * log_psi + w))
    out = np.where(at_end, 0.0, out)
    return _scalarize(out[0] if scalar else out, scalar)


def _quantile_tlqe_raw(u: np.ndarray, p: TlqeParams) -> np.ndarray:
    if _is_q_one(p.q):
        return _quantile_tle_raw(u, TleParams(p.alpha, p.lam))
    with np.errstate(divide="ignore"):
        log_one_minus_root = log1mexp(np.log(u) / p.alpha)
    c = (1.0 - p.q) / (2.0 * (2.0 - p.q))
    with np.errstate(over="ignore"):
        return -np.expm1(c * log_one_minus_root) / ((1.0 - p.q) * p.lam)


def quantile_tlqe(u, p: TlqeParams):
    """TLqE quantile: invert the CDF in closed form for u in (0, 1).

    psi* = (1 - u^(1/alpha))^((1-q)/(2*(2-q))), x = (1 - psi*)/((1-q)*lam);
    the q = 1 sliver falls back to the TLE closed form.
    """
    arr = np.asarray(u, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(np.isnan(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    out = _quantile_tlqe_raw(arr, p)
    return _scalarize(out[0] if scalar else out, scalar)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample(n: int, dist: Params, seed: int) -> SortedSample:
    """Draw n observations by inverse transform and return them sorted.

    Deterministic given ``seed``: uniforms come from a counter-based
    Philox stream keyed by the seed, and order statistics are produced
    with a plain ascending sort.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    u = generator(seed).random(n)
    if isinstance(dist, TlqeParams):
        x = _quantile_tlqe_raw(u, dist)
    else:
        x = _quantile_tle_raw(u, dist)
    return SortedSample(np.sort(x))
