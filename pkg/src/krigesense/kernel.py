"""Matern correlation and covariance, kernel matrices, evaluation grids.

The correlation follows the sqrt(2 nu) d / rho argument convention inside
both the power term and the Bessel term. Half-integer smoothness values
use their closed forms; every other order goes through the log-space
Bessel path so the Gamma(nu) / 2^(nu-1) prefactor cannot overflow at
small nu or tiny distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from . import specfun

__all__ = [
    "MaternParams",
    "ReducedParams",
    "LocationSet",
    "matern_correlation",
    "matern_covariance",
    "kernel_matrix",
    "make_grid",
]

_LN2 = math.log(2.0)
_HALF_INTEGER_TOL = 1e-12
_TINY_ARG = 1e-10


@dataclass(frozen=True)
class MaternParams:
    """Covariance hyperparameters (sigma2, rho, nu, tau2)."""

    sigma2: float
    rho: float
    nu: float
    tau2: float

    def __post_init__(self) -> None:
        for name in ("sigma2", "rho", "nu"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be a finite real > 0, got {v}")
        if not (math.isfinite(self.tau2) and self.tau2 >= 0.0):
            raise ValueError(f"tau2 must be a finite real >= 0, got {self.tau2}")
        if self.nu > specfun.NU_MAX:
            raise ValueError(f"nu must be <= {specfun.NU_MAX}, got {self.nu}")

    def reduced(self) -> "ReducedParams":
        """The (rho, nu, omega2 = tau2/sigma2) triple that predictions
        actually depend on."""
        return ReducedParams(rho=self.rho, nu=self.nu,
                             omega2=self.tau2 / self.sigma2)


@dataclass(frozen=True)
class ReducedParams:
    """(rho, nu, omega2); omega2 is the nugget-to-variance ratio."""

    rho: float
    nu: float
    omega2: float

    def __post_init__(self) -> None:
        for name in ("rho", "nu"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be a finite real > 0, got {v}")
        if not (math.isfinite(self.omega2) and self.omega2 >= 0.0):
            raise ValueError(
                f"omega2 must be a finite real >= 0, got {self.omega2}")
        if self.nu > specfun.NU_MAX:
            raise ValueError(f"nu must be <= {specfun.NU_MAX}, got {self.nu}")


@dataclass(frozen=True)
class LocationSet:
    """A set of 1-D or 2-D locations with pairwise-distinct points."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError(f"points must be (count, dim), got {pts.shape}")
        if pts.shape[1] not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {pts.shape[1]}")
        if pts.shape[0] < 1:
            raise ValueError("at least one location required")
        if not np.all(np.isfinite(pts)):
            raise ValueError("locations must be finite")
        if pts.shape[0] > 1 and float(np.min(pdist(pts))) <= 1e-12:
            raise ValueError("locations must be pairwise distinct (> 1e-12)")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def count(self) -> int:
        return self.points.shape[0]


def _check_correlation_params(rho: float, nu: float) -> tuple[float, float]:
    rho = float(rho)
    nu = float(nu)
    if not (math.isfinite(rho) and rho > 0.0):
        raise ValueError(f"rho must be a finite real > 0, got {rho}")
    if not (math.isfinite(nu) and 0.0 < nu <= specfun.NU_MAX):
        raise ValueError(
            f"nu must be in (0, {specfun.NU_MAX}], got {nu}")
    return rho, nu


def _tiny_argument_series(a: np.ndarray, nu: float) -> np.ndarray:
    # leading small-argument behavior 1 - Gamma(1-nu)/Gamma(1+nu) (a/2)^(2 nu)
    # for nu < 1; above that the correction is O(a^2) ~ 1e-20 and drops
    if nu >= 1.0:
        return np.ones_like(a)
    correction = np.exp(math.lgamma(1.0 - nu) - math.lgamma(1.0 + nu)
                        + 2.0 * nu * (np.log(a) - _LN2))
    return np.clip(1.0 - correction, 0.0, 1.0)


def matern_correlation(d, rho: float, nu: float):
    """Matern correlation at distance d (scalar or array).

    Exactly 1 at d = 0. nu in {1/2, 3/2, 5/2} (within 1e-12) uses the
    closed forms; other orders evaluate exp((1-nu) ln 2 - ln Gamma(nu)
    + nu ln a + ln K_nu(a)) with a = sqrt(2 nu) d / rho.
    """
    rho, nu = _check_correlation_params(rho, nu)
    arr = np.asarray(d, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("distances must be finite and >= 0")

    a = (math.sqrt(2.0 * nu) / rho) * arr
    if abs(nu - 0.5) <= _HALF_INTEGER_TOL:
        out = np.exp(-a)
    elif abs(nu - 1.5) <= _HALF_INTEGER_TOL:
        out = (1.0 + a) * np.exp(-a)
    elif abs(nu - 2.5) <= _HALF_INTEGER_TOL:
        out = (1.0 + a + a * a / 3.0) * np.exp(-a)
    else:
        out = np.ones_like(a)
        tiny = (a > 0.0) & (a < _TINY_ARG)
        main = a >= _TINY_ARG
        if np.any(tiny):
            out[tiny] = _tiny_argument_series(a[tiny], nu)
        if np.any(main):
            am = a[main]
            log_c = ((1.0 - nu) * _LN2 - math.lgamma(nu)
                     + nu * np.log(am) + specfun.bessel_k_log_array(nu, am))
            out[main] = np.minimum(np.exp(log_c), 1.0)
    out[arr == 0.0] = 1.0
    return float(out[0]) if scalar else out


def matern_covariance(d, params: MaternParams):
    """sigma2 * correlation + tau2 exactly at d = 0 (scalar or array)."""
    arr = np.asarray(d, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    cov = params.sigma2 * matern_correlation(arr, params.rho, params.nu)
    if params.tau2 != 0.0:
        cov[arr == 0.0] += params.tau2
    return float(cov[0]) if scalar else cov


def kernel_matrix(a: LocationSet, b: LocationSet,
                  params: MaternParams) -> np.ndarray:
    """Covariance matrix with entries phi(||a_i - b_j||).

    Entries are computed once per distinct distance and scattered back,
    which keeps repeated-structure grids cheap and makes same-set matrices
    exactly symmetric.
    """
    if a.dimension != b.dimension:
        raise ValueError(
            f"dimension mismatch: {a.dimension} vs {b.dimension}")
    d = cdist(a.points, b.points)
    uniq, inv = np.unique(d, return_inverse=True)
    cov = matern_covariance(uniq, params)
    return cov[inv].reshape(d.shape)


def make_grid(dimension: int, count_per_axis: int,
              exclude=None) -> LocationSet:
    """Uniform grid on [0, 1]^dimension, optionally minus one point.

    The 1-D identifiability grid is make_grid(1, 21, exclude=0.5): 21
    equispaced points with the prediction location removed, leaving 20.
    The 2-D study grid is make_grid(2, 4): the 4 x 4 = 16-point lattice.
    """
    if dimension not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {dimension}")
    if count_per_axis < 1:
        raise ValueError("count_per_axis must be >= 1")
    axis = np.linspace(0.0, 1.0, count_per_axis)
    if dimension == 1:
        pts = axis[:, None]
    else:
        u, v = np.meshgrid(axis, axis, indexing="ij")
        pts = np.column_stack([u.ravel(), v.ravel()])
    if exclude is not None:
        target = np.atleast_1d(np.asarray(exclude, dtype=float))
        if target.shape != (dimension,):
            raise ValueError(
                f"exclude must be a {dimension}-coordinate, got {exclude}")
        keep = np.linalg.norm(pts - target[None, :], axis=1) > 1e-12
        pts = pts[keep]
    return LocationSet(points=pts)
