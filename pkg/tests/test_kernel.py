"""Matern correlation/covariance, kernel matrices, and grid construction."""

import math

import numpy as np
import pytest

from krigesense import linalg
from krigesense.kernel import (LocationSet, MaternParams, ReducedParams,
                               kernel_matrix, make_grid, matern_correlation,
                               matern_covariance)
from oracles import bessel_k_quadrature, charpoly_eigenvalues


def test_correlation_anchor_values():
    assert matern_correlation(0.0, 1.3, 0.7) == 1.0
    # at d = rho the exponential case is e^{-1}
    for rho in (0.2, 1.0, 4.0):
        assert math.isclose(matern_correlation(rho, rho, 0.5),
                            math.exp(-1.0), rel_tol=1e-12)
    # closed form at nu = 3/2: (1 + sqrt(3) d / rho) exp(-sqrt(3) d / rho)
    expected = (1.0 + math.sqrt(3.0)) * math.exp(-math.sqrt(3.0))
    assert math.isclose(matern_correlation(1.0, 1.0, 1.5), expected,
                        rel_tol=1e-12)


def test_general_order_matches_quadrature_route():
    # rebuild the correlation from the quadrature Bessel oracle
    rng = np.random.default_rng(13)
    for _ in range(12):
        nu = rng.uniform(0.05, 2.6)
        if min(abs(nu - 0.5), abs(nu - 1.5), abs(nu - 2.5)) < 1e-6:
            continue
        rho = rng.uniform(0.1, 5.0)
        d = rng.uniform(0.01, 3.0)
        a = math.sqrt(2.0 * nu) * d / rho
        ref = (2.0 ** (1.0 - nu) / math.gamma(nu) * a ** nu
               * bessel_k_quadrature(nu, a))
        assert math.isclose(matern_correlation(d, rho, nu), ref,
                            rel_tol=1e-9), (d, rho, nu)


def test_correlation_tiny_distance_guard():
    # just above zero the value must stay in (0, 1] and approach 1
    for nu in (0.05, 0.3, 0.8, 1.7):
        c = matern_correlation(1e-13, 1.0, nu)
        assert 0.0 < c <= 1.0
        assert c > 0.9999 or nu < 0.1
    # continuity across the guard boundary for a rough order
    below = matern_correlation(0.9e-10 / math.sqrt(0.2), 1.0, 0.1)
    above = matern_correlation(1.1e-10 / math.sqrt(0.2), 1.0, 0.1)
    assert abs(below - above) < 1e-3


def test_correlation_array_and_bounds():
    d = np.array([0.0, 0.05, 0.3, 2.0, 10.0])
    for nu in (0.21, 0.5, 1.5, 2.5, 7.3):
        c = matern_correlation(d, 1.2, nu)
        assert c.shape == d.shape
        assert c[0] == 1.0
        assert np.all((c > 0.0) & (c <= 1.0))


def test_correlation_monotone_in_distance_and_range():
    ds = np.linspace(0.01, 3.0, 60)
    for nu in (0.3, 0.5, 1.5, 4.0):
        c = matern_correlation(ds, 1.0, nu)
        assert np.all(np.diff(c) < 0.0)
    for rho_lo, rho_hi in ((0.3, 0.5), (1.0, 2.0)):
        lo = matern_correlation(ds, rho_lo, 1.0)
        hi = matern_correlation(ds, rho_hi, 1.0)
        assert np.all(hi > lo)


def test_rbf_pointwise_limit_at_high_order():
    rho = 1.0
    for d in np.arange(0.1, 1.05, 0.1):
        gauss = math.exp(-d * d / (2.0 * rho * rho))
        assert abs(matern_correlation(float(d), rho, 50.0) - gauss) < 5e-3


def test_correlation_rejects_bad_inputs():
    with pytest.raises(ValueError):
        matern_correlation(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        matern_correlation(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        matern_correlation(1.0, 1.0, 50.5)
    with pytest.raises(ValueError):
        matern_correlation(-0.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        matern_correlation(float("nan"), 1.0, 1.0)


def test_covariance_values_and_nugget():
    p = MaternParams(sigma2=2.0, rho=1.0, nu=1.0, tau2=0.5)
    assert matern_covariance(0.0, p) == 2.5
    p = MaternParams(sigma2=1.0, rho=0.7, nu=0.5, tau2=0.0)
    assert math.isclose(matern_covariance(0.7, p), math.exp(-1.0),
                        rel_tol=1e-12)
    # derived spot value through the quadrature oracle
    nu, rho, d, sigma2 = 2.1, 0.9, 2.0, 1.7
    a = math.sqrt(2.0 * nu) * d / rho
    corr = (2.0 ** (1.0 - nu) / math.gamma(nu) * a ** nu
            * bessel_k_quadrature(nu, a))
    p = MaternParams(sigma2=sigma2, rho=rho, nu=nu, tau2=0.0)
    assert math.isclose(matern_covariance(d, p), sigma2 * corr, rel_tol=1e-9)


def test_covariance_scaling_identity():
    # scale sigma2 and tau2 together: covariance scales linearly, exactly
    rng = np.random.default_rng(23)
    d = np.array([0.0, 0.3, 1.4])
    for _ in range(20):
        sigma2 = rng.uniform(0.1, 5.0)
        omega2 = rng.uniform(0.0, 0.1)
        rho = rng.uniform(0.05, 5.0)
        nu = rng.uniform(0.05, 2.5)
        full = matern_covariance(
            d, MaternParams(sigma2, rho, nu, omega2 * sigma2))
        unit = matern_covariance(d, MaternParams(1.0, rho, nu, omega2))
        assert np.allclose(full, sigma2 * unit, rtol=1e-15)


def test_kernel_matrix_small_cases():
    one = LocationSet(points=np.array([[0.2]]))
    p = MaternParams(sigma2=1.3, rho=1.0, nu=0.5, tau2=0.2)
    assert np.allclose(kernel_matrix(one, one, p), [[1.5]], atol=0.0)
    two = LocationSet(points=np.array([[0.0], [0.7]]))
    p = MaternParams(sigma2=1.0, rho=0.7, nu=0.5, tau2=0.0)
    e = math.exp(-1.0)
    assert np.allclose(kernel_matrix(two, two, p),
                       [[1.0, e], [e, 1.0]], rtol=1e-12)


def test_kernel_matrix_exactly_symmetric():
    grid = make_grid(1, 20)
    rng = np.random.default_rng(31)
    for _ in range(10):
        p = MaternParams(rng.uniform(0.1, 5.0), rng.uniform(0.05, 5.0),
                         rng.uniform(0.05, 2.5), rng.uniform(0.0, 0.1))
        k = kernel_matrix(grid, grid, p)
        assert np.array_equal(k, k.T)


def test_kernel_matrix_near_psd_on_grid():
    # smallest eigenvalue of subsampled blocks stays above -1e-10; the
    # LAPACK symmetric eigensolver is the reference here because these
    # blocks are too ill-conditioned for the characteristic-polynomial
    # route to resolve eigenvalues near zero
    grid = make_grid(1, 21, exclude=0.5)
    rng = np.random.default_rng(37)
    for _ in range(8):
        p = MaternParams(rng.uniform(0.1, 5.0), rng.uniform(0.05, 5.0),
                         rng.uniform(0.05, 2.5), rng.uniform(0.0, 0.1))
        k = kernel_matrix(grid, grid, p)
        idx = rng.choice(20, size=8, replace=False)
        block = k[np.ix_(idx, idx)]
        eig = np.linalg.eigvalsh(block)
        assert eig.min() >= -1e-10


def test_kernel_matrix_dimension_mismatch():
    a = make_grid(1, 4)
    b = make_grid(2, 2)
    p = MaternParams(1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        kernel_matrix(a, b, p)


def test_make_grid_cases():
    g = make_grid(1, 3)
    assert np.allclose(g.points[:, 0], [0.0, 0.5, 1.0], atol=0.0)
    g = make_grid(1, 21, exclude=0.5)
    assert g.count == 20
    assert not np.any(np.isclose(g.points[:, 0], 0.5))
    g = make_grid(2, 4)
    assert g.count == 16 and g.dimension == 2
    axis = np.linspace(0.0, 1.0, 4)
    expect = {(float(u), float(v)) for u in axis for v in axis}
    got = {tuple(map(float, row)) for row in g.points}
    assert got == expect


def test_make_grid_exclude_validation():
    with pytest.raises(ValueError):
        make_grid(2, 4, exclude=0.5)
    with pytest.raises(ValueError):
        make_grid(3, 4)
    # excluding a point not on the grid leaves it unchanged
    assert make_grid(1, 4, exclude=0.5).count == 4


def test_param_validation_and_reduction():
    with pytest.raises(ValueError):
        MaternParams(0.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        MaternParams(1.0, -1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        MaternParams(1.0, 1.0, 1.0, -0.1)
    with pytest.raises(ValueError):
        MaternParams(1.0, 1.0, 51.0, 0.0)
    with pytest.raises(ValueError):
        ReducedParams(1.0, 0.0, 0.01)
    r = MaternParams(sigma2=4.0, rho=1.5, nu=0.8, tau2=0.02).reduced()
    assert r == ReducedParams(rho=1.5, nu=0.8, omega2=0.005)


def test_location_set_validation():
    with pytest.raises(ValueError):
        LocationSet(points=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        LocationSet(points=np.array([[0.1], [0.1]]))
    with pytest.raises(ValueError):
        LocationSet(points=np.array([[0.1], [0.1 + 1e-13]]))
    ls = LocationSet(points=np.array([0.0, 0.25, 1.0]))
    assert ls.points.shape == (3, 1)
    assert not ls.points.flags.writeable
