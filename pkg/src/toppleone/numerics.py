"""Shared floating-point primitives.

Everything downstream evaluates log-CDF values near 0 and 1, so the
usual `1 - exp(...)` and `log(1 - ...)` forms are banned in favour of
the expm1/log1p-based helpers below.
"""
from __future__ import annotations

import numpy as np

_LN2 = 0.6931471805599453

# Smallest positive normal double and its log; used as the floor when
# clamping log-CDF values so that downstream logs stay finite.
TINY = float(np.finfo(np.float64).tiny)
LOG_TINY = float(np.log(np.finfo(np.float64).tiny))


def log1mexp_raw(v):
    """log1mexp without the errstate guard; callers silence warnings."""
    near = np.log(-np.expm1(v))
    far = np.log1p(-np.exp(v))
    return np.where(v > -_LN2, near, far)


def log1mexp(v):
    """log(1 - exp(v)) for v <= 0, without cancellation.

    Switches between log(-expm1(v)) for v > -ln 2 and log1p(-exp(v))
    otherwise.  Maps v = 0 to -inf and v = -inf to 0.
    """
    v = np.asarray(v, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return log1mexp_raw(v)
