"""Simple kriging predictor: weights, variance, likelihood, neighbors.

The linear system is (Omega + omega2 I) w = c with Omega the unit-diagonal
correlation matrix of the training locations and c the correlation vector
against the prediction location. Weights and the variance ratio depend on
(rho, nu, omega2) only; sigma2 returns as an overall factor of the
variance and tau2 only through omega2 = tau2 / sigma2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg
from .kernel import (LocationSet, MaternParams, ReducedParams,
                     kernel_matrix, matern_correlation)

__all__ = [
    "KrigingSystem",
    "KrigingWeights",
    "kriging_weights",
    "predict_mean",
    "kriging_variance",
    "log_likelihood",
    "nearest_neighbors",
]


def _as_point(pred, dimension: int) -> np.ndarray:
    pt = np.atleast_1d(np.asarray(pred, dtype=float))
    if pt.shape != (dimension,):
        raise ValueError(
            f"prediction location must have {dimension} coordinate(s), "
            f"got shape {pt.shape}")
    if not np.all(np.isfinite(pt)):
        raise ValueError("prediction location must be finite")
    return pt


def _as_observations(y, count: int) -> np.ndarray:
    vec = np.asarray(y, dtype=float).reshape(-1)
    if vec.shape != (count,):
        raise ValueError(
            f"expected {count} observations, got shape {np.shape(y)}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("observations must be finite")
    return vec


@dataclass(frozen=True)
class KrigingSystem:
    """Factored kriging system shared by the weight and variance paths."""

    train: LocationSet
    pred: np.ndarray
    params: ReducedParams
    factor: linalg.SpdFactor
    cross: np.ndarray

    @classmethod
    def build(cls, train: LocationSet, pred,
              params: ReducedParams) -> "KrigingSystem":
        pt = _as_point(pred, train.dimension)
        unit = MaternParams(sigma2=1.0, rho=params.rho, nu=params.nu,
                            tau2=params.omega2)
        system_matrix = kernel_matrix(train, train, unit)
        factor = linalg.spd_factor(system_matrix)
        dists = np.linalg.norm(train.points - pt[None, :], axis=1)
        cross = matern_correlation(dists, params.rho, params.nu)
        return cls(train=train, pred=pt, params=params, factor=factor,
                   cross=cross)


@dataclass(frozen=True)
class KrigingWeights:
    weights: np.ndarray
    train_ref: LocationSet
    pred_ref: np.ndarray


def kriging_weights(train: LocationSet, pred,
                    params: ReducedParams) -> KrigingWeights:
    """Solve (Omega + omega2 I) w = c for the weight vector."""
    system = KrigingSystem.build(train, pred, params)
    w = linalg.spd_solve(system.factor, system.cross)
    return KrigingWeights(weights=w, train_ref=train, pred_ref=system.pred)


def predict_mean(weights: KrigingWeights, y) -> float:
    """Weighted sum of the observations, w . y."""
    vec = _as_observations(y, weights.train_ref.count)
    return float(weights.weights @ vec)


def kriging_variance(train: Optional[LocationSet], pred,
                     params: MaternParams) -> float:
    """sigma2 (1 - c^T (Omega + omega2 I)^{-1} c), clamped at -1e-10.

    With no training set the quadratic term vanishes and the prior
    variance sigma2 comes back.
    """
    if train is None:
        return params.sigma2
    system = KrigingSystem.build(train, pred, params.reduced())
    solved = linalg.spd_solve(system.factor, system.cross)
    ratio = 1.0 - float(system.cross @ solved)
    variance = params.sigma2 * ratio
    if variance < -1e-10:
        raise ArithmeticError(
            f"kriging variance {variance} below the -1e-10 guard")
    return max(variance, 0.0)


def log_likelihood(train: LocationSet, y, params: MaternParams) -> float:
    """Gaussian log density of y under the covariance model.

    The normalizing constant uses the input dimension of the locations,
    not the observation count, so the constant term is -(dim/2) ln(2 pi).
    """
    vec = _as_observations(y, train.count)
    cov = kernel_matrix(train, train, params)
    factor = linalg.spd_factor(cov)
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor.lower))))
    alpha = linalg.spd_solve(factor, vec)
    return (-0.5 * train.dimension * math.log(2.0 * math.pi)
            - 0.5 * log_det - 0.5 * float(vec @ alpha))


def nearest_neighbors(train: LocationSet, pred, k: int) -> np.ndarray:
    """Indices of the k nearest training locations, ties by lower index."""
    if not (1 <= k <= train.count):
        raise ValueError(f"k must be in [1, {train.count}], got {k}")
    pt = _as_point(pred, train.dimension)
    dists = np.linalg.norm(train.points - pt[None, :], axis=1)
    order = np.argsort(dists, kind="stable")
    return order[:k].copy()
