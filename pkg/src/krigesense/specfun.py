"""Modified Bessel function of the second kind, K_nu, for real order.

Linear-space evaluation goes through scipy's AMOS-backed routine. The log
variant works from the exponentially scaled form so that it stays finite
over the whole supported domain (nu in [0, 50], x in (0, 700]); in the
corner where even the scaled value overflows (large nu together with tiny
x) it switches to an ascending series evaluated fully in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import kv, kve

NU_MAX = 50.0
X_MAX = 700.0

__all__ = ["BesselEval", "bessel_k", "bessel_k_log", "NU_MAX", "X_MAX"]


def _check_domain(nu: float, x: float) -> tuple[float, float]:
    nu = float(nu)
    x = float(x)
    if not math.isfinite(nu) or nu < 0.0:
        raise ValueError(f"order must be a finite real >= 0, got {nu}")
    if nu > NU_MAX:
        raise ValueError(f"order must be <= {NU_MAX}, got {nu}")
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"argument must be a finite real > 0, got {x}")
    if x > X_MAX:
        raise ValueError(f"argument must be <= {X_MAX}, got {x}")
    return nu, x


def bessel_k(nu: float, x: float) -> float:
    """K_nu(x) in linear space.

    Raises OverflowError when the value exceeds the double range (small x
    with large nu); callers that need that regime use bessel_k_log.
    """
    nu, x = _check_domain(nu, x)
    value = float(kv(nu, x))
    if math.isinf(value):
        raise OverflowError(
            f"K_{nu}({x}) exceeds the double range; use bessel_k_log")
    if math.isnan(value):
        raise ArithmeticError(f"K_{nu}({x}) evaluation failed")
    return value


def bessel_k_log(nu: float, x: float) -> float:
    """ln K_nu(x), finite over the whole supported domain."""
    nu, x = _check_domain(nu, x)
    scaled = float(kve(nu, x))  # kve = K_nu(x) * exp(x)
    if math.isfinite(scaled) and scaled > 0.0:
        return math.log(scaled) - x
    return _log_k_small_x(nu, x)


def _log_k_small_x(nu: float, x: float) -> float:
    """Ascending series in log space for the overflow corner.

    K_nu(x) = (1/2) (x/2)^(-nu) * sum_k Gamma(nu-k)/k! (-x^2/4)^k + O((x/2)^nu),
    valid when (2/x)^nu dominates; the branch is only reached once
    Gamma(nu) (2/x)^nu has overflowed the scaled forward path, which forces
    nu >> 1 and x << 1, so the neglected I_nu contribution is below 1e-300
    relative and the series needs only a few terms.
    """
    # correction series in ratio form: term_{k+1}/term_k = (-x^2/4)/((k+1)(nu-k-1))
    series = 1.0
    term = 1.0
    quarter = -0.25 * x * x
    for k in range(8):
        denom = (k + 1.0) * (nu - k - 1.0)
        if denom == 0.0:
            break
        term *= quarter / denom
        series += term
        if abs(term) < 1e-18 * abs(series):
            break
    return (math.lgamma(nu) - math.log(2.0)
            + nu * (math.log(2.0) - math.log(x)) + math.log(series))


@dataclass(frozen=True)
class BesselEval:
    """One evaluation of K at (order, argument), stored in log space."""

    order: float
    argument: float
    log_value: float

    @classmethod
    def evaluate(cls, nu: float, x: float) -> "BesselEval":
        return cls(order=float(nu), argument=float(x),
                   log_value=bessel_k_log(nu, x))

    def value(self) -> float:
        """Linear-space value; raises OverflowError out of double range."""
        if self.log_value > 709.78:
            raise OverflowError("value exceeds the double range")
        return math.exp(self.log_value)


def bessel_k_log_array(nu: float, x: np.ndarray) -> np.ndarray:
    """Vectorized ln K_nu over an array of positive arguments.

    Internal helper for kernel-matrix assembly; skips the scalar domain
    ceremony (the kernel layer has already validated its parameters) but
    applies the same overflow fallback elementwise.
    """
    x = np.asarray(x, dtype=float)
    scaled = kve(nu, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(scaled) - x
    bad = ~np.isfinite(out)
    if np.any(bad):
        flat = out.reshape(-1)
        xflat = x.reshape(-1)
        for idx in np.nonzero(bad.reshape(-1))[0]:
            flat[idx] = _log_k_small_x(nu, float(xflat[idx]))
    return out
