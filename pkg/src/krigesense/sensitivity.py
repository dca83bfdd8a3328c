"""Global sensitivity of kriging weights and variance over standard ranges.

Total-effect Sobol indices come from the Jansen pick-freeze estimator on
paired i.i.d. sample matrices; a separate Latin hypercube sample
normalizes by the response variance. The kriging-weights response treats
the training-location index as one more input ("x"), a uniform discrete
factor, so the weight vector is analyzed as a functional response without
ever emulating it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import rng
from ._parallel import ordered_map
from .kernel import LocationSet, MaternParams, ReducedParams, make_grid
from .kriging import kriging_variance, kriging_weights

__all__ = [
    "UndefinedSharesError",
    "ParamBox",
    "StudyConfig",
    "SobolResult",
    "DEFAULT_RANGES",
    "FIXED_OMEGA2_CHOICES",
    "lhs_sample",
    "response_weights",
    "response_variance",
    "study_grid",
    "sobol_total",
    "run_study",
]

# hyperparameter ranges of the study box, in canonical column order
DEFAULT_RANGES: Tuple[Tuple[str, float, float], ...] = (
    ("sigma2", 0.1, 5.0),
    ("rho", 0.01, 5.0),
    ("nu", 0.01, 2.5),
    ("omega2", 0.001, 0.1),
)

FIXED_OMEGA2_CHOICES = (0.0, 0.001, 0.01, 0.1)

_BOOTSTRAP_REPLICATES = 200

STUDY_GRID_1D = make_grid(1, 21, exclude=0.5)
STUDY_POINT_1D = np.array([0.5])
STUDY_GRID_2D = make_grid(2, 4)
STUDY_POINT_2D = np.array([0.5, 0.5])


class UndefinedSharesError(ArithmeticError):
    """Raised when the total variance or the index sum is not positive."""


def study_grid(grid_dimension: int) -> Tuple[LocationSet, np.ndarray]:
    if grid_dimension == 1:
        return STUDY_GRID_1D, STUDY_POINT_1D
    if grid_dimension == 2:
        return STUDY_GRID_2D, STUDY_POINT_2D
    raise ValueError(f"grid_dimension must be 1 or 2, got {grid_dimension}")


@dataclass(frozen=True)
class ParamBox:
    """Active parameter ranges plus values held fixed."""

    ranges: Tuple[Tuple[str, float, float], ...]
    fixed: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        ranges = tuple((str(n), float(lo), float(hi))
                       for n, lo, hi in self.ranges)
        fixed = tuple((str(n), float(v)) for n, v in self.fixed)
        names = [n for n, _, _ in ranges] + [n for n, _ in fixed]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in {names}")
        for n, lo, hi in ranges:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"degenerate range for {n}: [{lo}, {hi}]")
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "fixed", fixed)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _, _ in self.ranges)

    @property
    def size(self) -> int:
        return len(self.ranges)

    @classmethod
    def defaults(cls, names=("sigma2", "rho", "nu", "omega2"),
                 fixed: Tuple[Tuple[str, float], ...] = ()
                 ) -> "ParamBox":
        table = {n: (lo, hi) for n, lo, hi in DEFAULT_RANGES}
        unknown = [n for n in names if n not in table]
        if unknown:
            raise ValueError(f"no tabulated range for {unknown}")
        return cls(ranges=tuple((n, *table[n]) for n in names), fixed=fixed)


@dataclass(frozen=True)
class StudyConfig:
    """One Sobol study row: grid, response, nugget handling, budget."""

    grid_dimension: int = 1
    response: str = "weights"
    omega2_mode: str = "varying"
    omega2_value: Optional[float] = None
    include_sigma2: bool = False
    sample_budget: int = 1024
    seed: int = 0

    def __post_init__(self) -> None:
        if self.grid_dimension not in (1, 2):
            raise ValueError(
                f"grid_dimension must be 1 or 2, got {self.grid_dimension}")
        if self.response not in ("weights", "prediction_variance"):
            raise ValueError(f"unknown response {self.response!r}")
        if self.omega2_mode not in ("fixed", "varying"):
            raise ValueError(f"unknown omega2_mode {self.omega2_mode!r}")
        if self.omega2_mode == "fixed":
            if self.omega2_value not in FIXED_OMEGA2_CHOICES:
                raise ValueError(
                    f"fixed omega2 must be one of {FIXED_OMEGA2_CHOICES}, "
                    f"got {self.omega2_value}")
        elif self.omega2_value is not None:
            raise ValueError("omega2_value only applies to fixed mode")
        if self.response == "weights" and self.include_sigma2:
            raise ValueError(
                "weights do not depend on sigma2; include_sigma2 must be "
                "False for the weights response")
        if self.sample_budget < 256:
            raise ValueError("sample_budget must be >= 256")


@dataclass(frozen=True)
class SobolResult:
    """Total-effect indices and their percent shares, per input."""

    inputs: Tuple[str, ...]
    total_index: np.ndarray
    percent_share: np.ndarray
    bootstrap_halfwidth: np.ndarray
    flagged: bool
    base_count: int
    evaluations: int

    def share_of(self, name: str) -> float:
        return float(self.percent_share[self.inputs.index(name)])

    def halfwidth_of(self, name: str) -> float:
        return float(self.bootstrap_halfwidth[self.inputs.index(name)])


def lhs_sample(count: int, box: ParamBox, seed: int) -> np.ndarray:
    """Latin hypercube design over the active box, one point per stratum.

    Each column independently permutes the strata and jitters uniformly
    inside each one, then scales to [min, max].
    """
    p = box.size
    if count < max(p, 1):
        raise ValueError(f"count must be >= {max(p, 1)}, got {count}")
    g = rng.stream(seed)
    out = np.empty((count, p))
    for j, (_, lo, hi) in enumerate(box.ranges):
        strata = g.permutation(count)
        jitter = g.random(count)
        out[:, j] = lo + (hi - lo) * (strata + jitter) / count
    return out


def _weight_vector(params: ReducedParams, grid_dimension: int,
                   train: Optional[LocationSet],
                   point) -> np.ndarray:
    if train is None:
        train, point = study_grid(grid_dimension)
    return kriging_weights(train, point, params).weights


def response_weights(params: ReducedParams, location_index: int,
                     grid_dimension: int = 1,
                     train: Optional[LocationSet] = None,
                     point=None) -> float:
    """The location_index-th kriging weight on the study grid.

    The default grids are the fixed study layouts (20-point 1-D grid with
    the prediction at 0.5; 16-point 2-D lattice with the prediction at
    the center); pass train/point explicitly to override.
    """
    w = _weight_vector(params, grid_dimension, train, point)
    idx = int(location_index)
    if not 0 <= idx < w.size:
        raise ValueError(f"location_index {idx} outside [0, {w.size})")
    return float(w[idx])


def response_variance(sigma2: float, rho: float, nu: float, omega2: float,
                      grid_dimension: int = 1,
                      train: Optional[LocationSet] = None,
                      point=None) -> float:
    """Kriging variance at the study prediction point; omega2 enters as
    the nugget ratio, so tau2 = omega2 * sigma2."""
    if train is None:
        train, point = study_grid(grid_dimension)
    params = MaternParams(sigma2=float(sigma2), rho=float(rho), nu=float(nu),
                          tau2=float(omega2) * float(sigma2))
    return kriging_variance(train, point, params)


def _evaluate(f: Callable[[np.ndarray], float], rows: np.ndarray,
              label: str) -> np.ndarray:
    chunk_count = max(1, min(len(rows), 64))
    chunks = np.array_split(rows, chunk_count)
    parts = ordered_map(
        lambda block: np.array([float(f(r)) for r in block]), chunks)
    values = np.concatenate(parts)
    if not np.all(np.isfinite(values)):
        raise ArithmeticError(f"non-finite response value in {label} sample")
    return values


def _balanced_indices(count: int, n_levels: int,
                      g: np.random.Generator) -> np.ndarray:
    reps = -(-count // n_levels)
    pool = np.tile(np.arange(n_levels), reps)[:count]
    return g.permutation(pool).astype(float)


def sobol_total(f: Callable[[np.ndarray], float], box: ParamBox,
                base_count: int = 1024, seed: int = 0,
                location_count: Optional[int] = None) -> SobolResult:
    """Jansen pick-freeze total-effect indices of f over the box.

    f maps one input vector (active parameters in box order, then the
    location index when location_count is given) to a scalar. Indices use
    T_i = sum((f(A) - f(A_B^i))^2) / (2 N varhat), with varhat taken from
    an independent Latin hypercube sample; 200 bootstrap resamples give a
    95% halfwidth on the percent-share scale. Cost is exactly
    base_count * (p + 2) evaluations of f.
    """
    if base_count < 256:
        raise ValueError(f"base_count must be >= 256, got {base_count}")
    names = list(box.names)
    p_cont = box.size
    if location_count is not None:
        if location_count < 1:
            raise ValueError("location_count must be >= 1")
        names.append("x")
    p = len(names)
    if p == 0:
        raise ValueError("no active inputs")
    n = base_count

    lows = np.array([lo for _, lo, _ in box.ranges])
    highs = np.array([hi for _, _, hi in box.ranges])

    def draw_matrix(g: np.random.Generator) -> np.ndarray:
        cont = g.uniform(lows, highs, size=(n, p_cont)) if p_cont else \
            np.empty((n, 0))
        if location_count is None:
            return cont
        x_col = g.integers(0, location_count, n).astype(float)
        return np.column_stack([cont, x_col])

    a = draw_matrix(rng.stream(seed, 1))
    b = draw_matrix(rng.stream(seed, 2))

    f_a = _evaluate(f, a, "A")
    squared = np.empty((p, n))
    for i in range(p):
        hybrid = a.copy()
        hybrid[:, i] = b[:, i]
        f_h = _evaluate(f, hybrid, f"A_B^{names[i]}")
        squared[i] = (f_a - f_h) ** 2

    if p_cont:
        var_rows = lhs_sample(n, box, seed)
    else:
        var_rows = np.empty((n, 0))
    if location_count is not None:
        x_col = _balanced_indices(n, location_count, rng.stream(seed, 3))
        var_rows = np.column_stack([var_rows, x_col])
    f_var = _evaluate(f, var_rows, "variance")
    var_hat = float(np.var(f_var, ddof=1))
    if var_hat <= 0.0:
        raise UndefinedSharesError("response variance estimate is zero")

    totals = squared.mean(axis=1) / (2.0 * var_hat)
    total_sum = float(totals.sum())
    if total_sum <= 0.0:
        raise UndefinedSharesError("total-effect indices sum to zero")
    shares = 100.0 * totals / total_sum

    g_boot = rng.stream(seed, 4)
    replicate_shares = []
    for _ in range(_BOOTSTRAP_REPLICATES):
        idx = g_boot.integers(0, n, n)
        idx_var = g_boot.integers(0, n, n)
        var_b = float(np.var(f_var[idx_var], ddof=1))
        if var_b <= 0.0:
            continue
        totals_b = squared[:, idx].mean(axis=1) / (2.0 * var_b)
        sum_b = float(totals_b.sum())
        if sum_b <= 0.0:
            continue
        replicate_shares.append(100.0 * totals_b / sum_b)
    if not replicate_shares:
        raise UndefinedSharesError("all bootstrap replicates degenerate")
    stacked = np.vstack(replicate_shares)
    lo_q, hi_q = np.percentile(stacked, [2.5, 97.5], axis=0)
    halfwidth = 0.5 * (hi_q - lo_q)

    return SobolResult(
        inputs=tuple(names),
        total_index=totals,
        percent_share=shares,
        bootstrap_halfwidth=halfwidth,
        flagged=bool(np.any(totals < -0.05)),
        base_count=n,
        evaluations=n * (p + 2),
    )


def run_study(config: StudyConfig) -> SobolResult:
    """One study row: wire the response and active inputs, run sobol_total.

    Active inputs, in order: sigma2 (variance response only, when
    included), rho, nu, omega2 (when varying), and the location factor x
    (weights response only). Fixed-omega2 rows drop omega2 from the
    inputs entirely; a variance study without sigma2 holds it at 1.
    """
    active = []
    if config.response == "prediction_variance" and config.include_sigma2:
        active.append("sigma2")
    active.extend(["rho", "nu"])
    if config.omega2_mode == "varying":
        active.append("omega2")
    box = ParamBox.defaults(tuple(active))

    fixed_omega2 = (config.omega2_value
                    if config.omega2_mode == "fixed" else None)
    train, point = study_grid(config.grid_dimension)
    positions = {name: j for j, name in enumerate(active)}

    if config.response == "weights":
        x_pos = len(active)

        def f(row: np.ndarray) -> float:
            omega2 = (row[positions["omega2"]]
                      if fixed_omega2 is None else fixed_omega2)
            params = ReducedParams(rho=row[positions["rho"]],
                                   nu=row[positions["nu"]],
                                   omega2=omega2)
            return response_weights(params, int(row[x_pos]),
                                    train=train, point=point)

        location_count = train.count
    else:

        def f(row: np.ndarray) -> float:
            omega2 = (row[positions["omega2"]]
                      if fixed_omega2 is None else fixed_omega2)
            sigma2 = (row[positions["sigma2"]]
                      if "sigma2" in positions else 1.0)
            return response_variance(sigma2, row[positions["rho"]],
                                     row[positions["nu"]], omega2,
                                     train=train, point=point)

        location_count = None

    return sobol_total(f, box, base_count=config.sample_budget,
                       seed=config.seed, location_count=location_count)
