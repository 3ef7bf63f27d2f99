"""Constrained minimization over transformed parameters with multi-start.

The feasible region (alpha > 0, lam > 0, q in an open interval below 2)
is mapped to unconstrained coordinates: log for alpha and lam, a scaled
logistic for q.  A Nelder-Mead simplex runs in the transformed space
from each start; the winning start is then polished with a small BFGS
using the analytic gradients when the objective provides them.  The
simplex baseline is what the contracts are written against; the polish
only ever lowers the attained value.

Objectives are callables ``objective(params, gradient=False)`` returning
an ObjectiveValue whose value is +inf at infeasible points.  Callers on
the hot path may also hand ``minimize`` a bare value function over the
raw parameter tuple (same floating-point semantics, no wrappers); the
fitting layer builds both from the same formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .data import SortedSample
from .distributions import Params, TleParams, TlqeParams
from .objectives import ObjectiveValue
from .seeds import generator, split

__all__ = [
    "ParamSpace",
    "OptimizerConfig",
    "OptimizeOutcome",
    "NoFeasibleStartError",
    "minimize",
    "default_initial_guesses",
]

# transformed coordinates are clamped so exp() stays finite
_Z_CLAMP = 700.0


class NoFeasibleStartError(RuntimeError):
    """Raised when every supplied initial guess is infeasible."""


def _clamp(v: float) -> float:
    if v > _Z_CLAMP:
        return _Z_CLAMP
    if v < -_Z_CLAMP:
        return -_Z_CLAMP
    return v


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 2000
    value_tolerance: float = 1e-10
    point_tolerance: float = 1e-8
    starts: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations <= 0 or self.starts <= 0:
            raise ValueError("max_iterations and starts must be positive")
        if self.value_tolerance <= 0.0 or self.point_tolerance <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class ParamSpace:
    """Smooth bijection between parameter records and R^d.

    Coordinate order matches the gradient convention: z = (log lam,
    log alpha) for TLE and (log lam, log alpha, logit-scaled q) for
    TLqE, with q mapped onto the open interval (q_lower, 2 - q_margin).
    """

    kind: str  # "tle" | "tlqe"
    q_lower: float = -5.0
    q_margin: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("tle", "tlqe"):
            raise ValueError(f"kind must be 'tle' or 'tlqe', got {self.kind!r}")

    @property
    def dimension(self) -> int:
        return 3 if self.kind == "tlqe" else 2

    @property
    def _q_span(self) -> float:
        return (2.0 - self.q_margin) - self.q_lower

    def to_vector(self, p: Params) -> np.ndarray:
        if self.kind == "tlqe":
            frac = (p.q - self.q_lower) / self._q_span
            if not 0.0 < frac < 1.0:
                raise ValueError(
                    f"q={p.q} outside ({self.q_lower}, {2.0 - self.q_margin})")
            return np.array([math.log(p.lam), math.log(p.alpha),
                             math.log(frac / (1.0 - frac))])
        return np.array([math.log(p.lam), math.log(p.alpha)])

    def theta(self, z: Sequence[float]) -> tuple:
        """Raw parameter tuple (lam, alpha[, q]) for a transformed point."""
        lam = math.exp(_clamp(float(z[0])))
        alpha = math.exp(_clamp(float(z[1])))
        if self.kind == "tlqe":
            q = self.q_lower + self._q_span * _sigmoid(_clamp(float(z[2])))
            return lam, alpha, q
        return lam, alpha

    def to_params(self, z: Sequence[float]) -> Params:
        th = self.theta(z)
        if self.kind == "tlqe":
            return TlqeParams(th[1], th[0], th[2])
        return TleParams(th[1], th[0])

    def chain_scale(self, z: Sequence[float]) -> np.ndarray:
        """d(params)/dz, used to pull parameter gradients back to z."""
        th = self.theta(z)
        out = np.array(th)
        if self.kind == "tlqe":
            sg = _sigmoid(_clamp(float(z[2])))
            out[2] = self._q_span * sg * (1.0 - sg)
        return out


@dataclass(frozen=True, eq=False)
class OptimizeOutcome:
    """Result of a multi-start minimization.

    iterations_used counts simplex iterations plus polish steps summed
    over all starts; per_start_values holds each start's final value
    (the winning entry reflects the gradient polish).
    """

    best_params: Params
    best_value: float
    converged: bool
    iterations_used: int
    starts_tried: int
    per_start_values: tuple


def _as_value(ov: ObjectiveValue) -> float:
    v = ov.value
    return math.inf if math.isnan(v) else v


def _sort_simplex(pts, vals):
    order = sorted(range(len(vals)), key=lambda j: (vals[j], j))
    return [pts[j] for j in order], [vals[j] for j in order]


def _nelder_mead(f: Callable[[list], float], z0: list,
                 cfg: OptimizerConfig, step: float = 0.25):
    """Simplex minimization; returns (z_best, f_best, converged, iters)."""
    d = len(z0)
    pts = [list(z0)]
    vals = [f(z0)]
    for i in range(d):
        z = list(z0)
        z[i] += step
        pts.append(z)
        vals.append(f(z))
    pts, vals = _sort_simplex(pts, vals)

    converged = False
    iters = 0
    while iters < cfg.max_iterations:
        iters += 1
        if vals[-1] - vals[0] <= cfg.value_tolerance:
            best = pts[0]
            tight = True
            for p in pts[1:]:
                for i in range(d):
                    if abs(p[i] - best[i]) > cfg.point_tolerance:
                        tight = False
                        break
                if not tight:
                    break
            if tight:
                converged = True
                break

        worst = pts[-1]
        cen = [0.0] * d
        for p in pts[:-1]:
            for i in range(d):
                cen[i] += p[i]
        zr = [0.0] * d
        for i in range(d):
            cen[i] /= d
            zr[i] = cen[i] + (cen[i] - worst[i])
        fr = f(zr)
        if fr < vals[0]:
            ze = [cen[i] + 2.0 * (cen[i] - worst[i]) for i in range(d)]
            fe = f(ze)
            if fe < fr:
                pts[-1], vals[-1] = ze, fe
            else:
                pts[-1], vals[-1] = zr, fr
        elif fr < vals[-2]:
            pts[-1], vals[-1] = zr, fr
        else:
            if fr < vals[-1]:
                zc = [cen[i] + 0.5 * (zr[i] - cen[i]) for i in range(d)]
                fc = f(zc)
                accept = fc <= fr
            else:
                zc = [cen[i] - 0.5 * (cen[i] - worst[i]) for i in range(d)]
                fc = f(zc)
                accept = fc < vals[-1]
            if accept:
                pts[-1], vals[-1] = zc, fc
            else:
                best = pts[0]
                for j in range(1, d + 1):
                    pts[j] = [best[i] + 0.5 * (pts[j][i] - best[i])
                              for i in range(d)]
                    vals[j] = f(pts[j])
        pts, vals = _sort_simplex(pts, vals)

    return pts[0], vals[0], converged, iters


def _bfgs_polish(fg, z0: np.ndarray, f0: float, g0: np.ndarray,
                 max_iter: int = 150):
    """Monotone quasi-Newton refinement; returns (z, f, iters).

    fg(z) -> (value, grad_z or None).  Steps are accepted only when they
    decrease the value, so the polished result never exceeds f0.
    """
    d = z0.size
    eye = np.eye(d)
    H = eye.copy()
    z, fv, g = z0.copy(), f0, g0.copy()
    iters = 0
    for _ in range(max_iter):
        if not np.all(np.isfinite(g)):
            break
        if np.max(np.abs(g)) <= 1e-9 * (1.0 + abs(fv)):
            break
        iters += 1
        direction = -H @ g
        slope = g @ direction
        if not math.isfinite(slope) or slope >= 0.0:
            H = eye.copy()
            direction = -g
            slope = g @ direction
        t = 1.0
        accepted = False
        f_new, g_new = fv, None
        while t >= 1e-12:
            z_new = z + t * direction
            f_new, g_new = fg(z_new)
            if math.isfinite(f_new) and f_new < fv + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted or g_new is None:
            break
        s = z_new - z
        y = g_new - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            V = eye - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)
        z, fv, g = z_new, f_new, g_new
    return z, fv, iters


def minimize(objective, space: ParamSpace, cfg: OptimizerConfig,
             initial_guesses: Sequence[Params],
             value_fn: Optional[Callable] = None) -> OptimizeOutcome:
    """Multi-start simplex minimization with deterministic tie-breaking.

    Each guess seeds one simplex run; the lowest final value wins, ties
    broken by earliest start index.  Guesses that are already infeasible
    are recorded with value +inf and skipped; if all of them are, a
    NoFeasibleStartError is raised.  ``value_fn``, when given, must map
    the raw parameter tuple to the same value objective() reports.
    """
    if not initial_guesses:
        raise ValueError("at least one initial guess is required")

    if value_fn is None:
        def value_fn_local(*theta):
            if space.kind == "tlqe":
                p = TlqeParams(theta[1], theta[0], theta[2])
            else:
                p = TleParams(theta[1], theta[0])
            return _as_value(objective(p, gradient=False))
        raw = value_fn_local
    else:
        raw = value_fn

    theta_of = space.theta

    def f(z: list) -> float:
        v = raw(*theta_of(z))
        return math.inf if v != v else v

    def fg(z: np.ndarray):
        ov = objective(space.to_params(z), gradient=True)
        v = _as_value(ov)
        if ov.gradient is None or not np.all(np.isfinite(ov.gradient)):
            return v, None
        return v, ov.gradient * space.chain_scale(z)

    results = []  # (value, z, converged)
    total_iters = 0
    any_feasible = False
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for guess in initial_guesses:
            z0 = list(space.to_vector(guess))
            f0 = f(z0)
            if not math.isfinite(f0):
                results.append((math.inf, z0, False))
                continue
            any_feasible = True
            z_best, f_best, conv, iters = _nelder_mead(f, z0, cfg)
            total_iters += iters
            results.append((f_best, z_best, conv))
        if not any_feasible:
            raise NoFeasibleStartError(
                "every initial guess is infeasible for this sample")

        winner = min(range(len(results)), key=lambda j: (results[j][0], j))
        best_value, best_z, best_conv = results[winner]
        best_z = np.asarray(best_z, dtype=np.float64)

        # gradient polish of the winning start (monotone, so the
        # multi-start ordering and the value contract are preserved)
        _, g_win = fg(best_z)
        if g_win is not None:
            best_z, best_value, polish_iters = _bfgs_polish(
                fg, best_z, best_value, g_win)
            total_iters += polish_iters

    per_start = tuple(best_value if j == winner else results[j][0]
                      for j in range(len(results)))
    return OptimizeOutcome(
        best_params=space.to_params(best_z),
        best_value=best_value,
        converged=best_conv,
        iterations_used=total_iters,
        starts_tried=len(results),
        per_start_values=per_start,
    )


def default_initial_guesses(s: SortedSample, kind: str, starts: int = 8,
                            seed: int = 0):
    """Moment-matched anchors plus deterministic log-space jitter.

    The anchor rate comes from the alpha = 1 median formula
    lam0 = ln(2) / (2 * median); TLqE gets anchors at q = 0.5 and 1.5.
    Guesses with q < 1 shrink the rate below the feasibility bound
    1/((1-q) * x_(n)) so every returned guess is feasible for ``s``.
    """
    if s.n < 2:
        raise ValueError("need at least 2 observations to seed the optimizer")
    if kind not in ("tle", "tlqe"):
        raise ValueError(f"kind must be 'tle' or 'tlqe', got {kind!r}")
    if starts < 1:
        raise ValueError("starts must be >= 1")
    med = float(np.median(s.values))
    if med <= 0.0:
        med = max(float(np.mean(s.values)), 1e-12)
    lam0 = math.log(2.0) / (2.0 * med)
    x_max = float(s.values[-1])
    rng = generator(split(seed, 0x6775657373))  # tag: "guess"

    def cap_lam(lam: float, q: float) -> float:
        if q < 1.0 and x_max > 0.0:
            return min(lam, 0.9 / ((1.0 - q) * x_max))
        return lam

    guesses = []
    if kind == "tle":
        guesses.append(TleParams(1.0, lam0))
        while len(guesses) < starts:
            lam = lam0 * math.exp(0.75 * rng.standard_normal())
            alpha = math.exp(0.75 * rng.standard_normal())
            guesses.append(TleParams(alpha, lam))
    else:
        anchors = (0.5, 1.5)
        guesses.append(TlqeParams(1.0, cap_lam(lam0, 0.5), 0.5))
        if starts > 1:
            guesses.append(TlqeParams(1.0, cap_lam(lam0, 1.5), 1.5))
        while len(guesses) < starts:
            q = anchors[len(guesses) % 2]
            lam = lam0 * math.exp(0.75 * rng.standard_normal())
            alpha = math.exp(0.75 * rng.standard_normal())
            guesses.append(TlqeParams(alpha, cap_lam(lam, q), q))
    return guesses
