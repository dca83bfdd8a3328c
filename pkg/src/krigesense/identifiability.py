"""Local sensitivity matrices and the collinearity index.

The index gamma = 1 / sqrt(min eigenvalue of S^T S) is evaluated on a
column-normalized sensitivity matrix; gamma near 1 means the parameters
act on the output in nearly orthogonal directions, large gamma means some
combination of them is locally unidentifiable. The (nu, rho) scan maps
gamma over the smoothness/range plane for two outputs: the correlation
curve seen from the prediction point and the kriging weight vector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from . import linalg
from ._parallel import ordered_map
from .kernel import ReducedParams, make_grid, matern_correlation
from .kriging import kriging_weights

__all__ = [
    "UndefinedCollinearityError",
    "SensitivityMatrix",
    "CollinearityCell",
    "GAMMA_CAP",
    "band_of",
    "local_sensitivities",
    "collinearity_index",
    "collinearity_scan",
]

GAMMA_CAP = 1e12

_SCAN_OMEGA2 = 0.001
_SCAN_GRID = make_grid(1, 21, exclude=0.5)
_SCAN_POINT = 0.5
_SCAN_DISTANCES = np.abs(_SCAN_GRID.points[:, 0] - _SCAN_POINT)


class UndefinedCollinearityError(ValueError):
    """Raised when a sensitivity matrix has an all-zero column."""


@dataclass(frozen=True)
class SensitivityMatrix:
    """Finite-difference sensitivities, one row per output component."""

    entries: np.ndarray
    normalization: str = "raw"
    zero_columns: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"entries must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("entries must be finite")
        if self.normalization not in ("raw", "unit-column"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "zero_columns",
                           tuple(int(j) for j in self.zero_columns))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def normalized(self) -> "SensitivityMatrix":
        """Scale each column to unit Euclidean norm; all-zero columns are
        left in place and flagged."""
        norms = np.linalg.norm(self.entries, axis=0)
        zero = tuple(int(j) for j in np.nonzero(norms == 0.0)[0])
        safe = np.where(norms == 0.0, 1.0, norms)
        return SensitivityMatrix(entries=self.entries / safe[None, :],
                                 normalization="unit-column",
                                 zero_columns=zero)


@dataclass(frozen=True)
class CollinearityCell:
    nu: float
    rho: float
    gamma_correlation: float
    gamma_weights: float
    band: str


def band_of(gamma: float) -> str:
    """identifiable below 10, borderline on [10, 20], collinear above."""
    if gamma < 10.0:
        return "identifiable"
    if gamma <= 20.0:
        return "borderline"
    return "collinear"


def local_sensitivities(f: Callable[[np.ndarray], np.ndarray], theta,
                        rel_step: float = 1e-5) -> SensitivityMatrix:
    """Central-difference sensitivity matrix of f at theta.

    Step for parameter j is rel_step * max(|theta_j|, 1e-3), so steps stay
    sensible for parameters near zero.
    """
    if not rel_step > 0.0:
        raise ValueError(f"rel_step must be > 0, got {rel_step}")
    base = np.asarray(theta, dtype=float).reshape(-1)
    if base.size == 0 or not np.all(np.isfinite(base)):
        raise ValueError("theta must be a finite nonempty vector")

    columns = []
    n_out = None
    for j in range(base.size):
        h = rel_step * max(abs(base[j]), 1e-3)
        up = base.copy()
        up[j] += h
        down = base.copy()
        down[j] -= h
        f_up = np.atleast_1d(np.asarray(f(up), dtype=float))
        f_down = np.atleast_1d(np.asarray(f(down), dtype=float))
        if f_up.shape != f_down.shape or f_up.ndim != 1:
            raise ValueError("f must return a fixed-length vector")
        if n_out is None:
            n_out = f_up.size
        elif f_up.size != n_out:
            raise ValueError("f returned inconsistent lengths")
        columns.append((f_up - f_down) / (2.0 * h))
    return SensitivityMatrix(entries=np.column_stack(columns),
                             normalization="raw")


def collinearity_index(s: SensitivityMatrix) -> float:
    """gamma = 1 / sqrt(smallest eigenvalue of S^T S), in [1, 1e12]."""
    if s.normalization != "unit-column":
        raise ValueError("collinearity_index needs unit-column normalization")
    if s.zero_columns:
        raise UndefinedCollinearityError(
            f"all-zero sensitivity column(s) {s.zero_columns}: "
            "collinearity is undefined")
    gram = s.entries.T @ s.entries
    eigenvalues = linalg.sym_eigenvalues(gram)
    smallest = float(eigenvalues[-1])
    if smallest <= 1.0 / (GAMMA_CAP * GAMMA_CAP):
        return GAMMA_CAP
    return float(np.clip(1.0 / np.sqrt(smallest), 1.0, GAMMA_CAP))


def _correlation_curve(theta: np.ndarray) -> np.ndarray:
    return matern_correlation(_SCAN_DISTANCES, rho=theta[1], nu=theta[0])


def _weight_curve(theta: np.ndarray) -> np.ndarray:
    params = ReducedParams(rho=float(theta[1]), nu=float(theta[0]),
                           omega2=_SCAN_OMEGA2)
    return kriging_weights(_SCAN_GRID, _SCAN_POINT, params).weights


def _gamma_of(f: Callable[[np.ndarray], np.ndarray],
              theta: np.ndarray) -> float:
    return collinearity_index(local_sensitivities(f, theta).normalized())


def collinearity_scan(grid_nu=(0.01, 2.5), grid_rho=(0.01, 5.0),
                      resolution: int = 100,
                      output_kind: str = "correlation_curve",
                      ) -> List[CollinearityCell]:
    """gamma over a (nu, rho) grid for both scan outputs.

    Every cell carries gamma for the correlation curve and for the
    kriging weights (fixed omega2 = 0.001, 20-point 1-D grid, prediction
    at 0.5); the band field reflects output_kind. Cells that fail to
    evaluate get NaN gammas and band "failed"; failures are collected and
    reported as a warning instead of aborting the scan. Cell order is
    row-major in (nu index, rho index).
    """
    if output_kind not in ("correlation_curve", "kriging_weights"):
        raise ValueError(f"unknown output_kind {output_kind!r}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    for name, (lo, hi) in (("grid_nu", tuple(grid_nu)),
                           ("grid_rho", tuple(grid_rho))):
        if not (0.0 < lo < hi):
            raise ValueError(f"{name} must satisfy 0 < lo < hi, got {lo},{hi}")

    nus = np.linspace(grid_nu[0], grid_nu[1], resolution)
    rhos = np.linspace(grid_rho[0], grid_rho[1], resolution)
    failures: List[str] = []

    def scan_row(nu: float) -> List[CollinearityCell]:
        cells = []
        for rho in rhos:
            theta = np.array([nu, rho])
            try:
                g_corr = _gamma_of(_correlation_curve, theta)
                g_wts = _gamma_of(_weight_curve, theta)
            except Exception as exc:  # noqa: BLE001 - per-cell aggregation
                failures.append(f"(nu={nu:.6g}, rho={rho:.6g}): {exc!r}")
                cells.append(CollinearityCell(
                    nu=float(nu), rho=float(rho),
                    gamma_correlation=float("nan"),
                    gamma_weights=float("nan"), band="failed"))
                continue
            chosen = (g_corr if output_kind == "correlation_curve"
                      else g_wts)
            cells.append(CollinearityCell(
                nu=float(nu), rho=float(rho), gamma_correlation=g_corr,
                gamma_weights=g_wts, band=band_of(chosen)))
        return cells

    rows = ordered_map(scan_row, list(nus))
    if failures:
        warnings.warn(
            f"{len(failures)} scan cell(s) failed; first: {failures[0]}",
            RuntimeWarning, stacklevel=2)
    return [cell for row in rows for cell in row]
