import math

import numpy as np
import pytest

from plapext.core import (DualDensity, Params, RadialFunction, build_grid,
                          dual_pair, omega_N, pairing_vector, x_norm)


@pytest.fixture(scope="module")
def grid():
    return build_grid(40.0, 256, N=3)


def test_params_regimes():
    assert Params(p=1.5, N=3).regime == "singular"
    assert Params(p=2.0, N=3).regime == "linear"
    assert Params(p=2.5, N=4).regime == "degenerate"
    with pytest.raises(ValueError):
        Params(p=1.0, N=3)


def test_omega_n_closed_forms():
    assert omega_N(2) == pytest.approx(2.0 * math.pi)
    assert omega_N(3) == pytest.approx(4.0 * math.pi)
    assert omega_N(4) == pytest.approx(2.0 * math.pi ** 2)


def test_grid_cell_moments_are_exact(grid):
    # int_cell r^{N-1} dr = (b^N - a^N)/N, exactly
    a, b = grid.nodes[:-1], grid.nodes[1:]
    np.testing.assert_allclose(grid.cell_vol, (b ** 3 - a ** 3) / 3.0,
                               rtol=1e-14)


def test_quad_weights_integrate_linear_exactly(grid):
    # integral of r * r^{N-1} dr over [1, R] via hat weights is exact
    vals = grid.nodes.copy()
    approx = float(grid.quad_weights @ vals)
    R = grid.nodes[-1]
    assert approx == pytest.approx((R ** 4 - 1.0) / 4.0, rel=1e-13)


def test_x_norm_homogeneity(grid):
    params = Params(p=1.5, N=3)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(grid.nodes.size)
    v[0] = 0.0
    u = RadialFunction(grid, v)
    u3 = RadialFunction(grid, 3.0 * v)
    assert x_norm(u3, params) == pytest.approx(3.0 * x_norm(u, params),
                                               rel=1e-12)


def test_x_norm_closed_form(grid):
    # u = r - 1 on [1, R]: |u'| = 1, x_norm^p = omega (R^N - 1)/N
    params = Params(p=2.0, N=3)
    u = RadialFunction(grid, grid.nodes - 1.0)
    R = grid.nodes[-1]
    expect = (params.omega * (R ** 3 - 1.0) / 3.0) ** 0.5
    assert x_norm(u, params) == pytest.approx(expect, rel=1e-13)


def test_pairing_vector_matches_dual_pair(grid):
    dens = np.exp(-((grid.nodes - 3.0) ** 2))
    dens[0] = dens[-1] = 0.0
    h = DualDensity(RadialFunction(grid, dens))
    rng = np.random.default_rng(1)
    v = rng.standard_normal(grid.nodes.size)
    v[0] = 0.0
    u = RadialFunction(grid, v)
    P = pairing_vector(h, grid)
    assert float(P @ v) == pytest.approx(dual_pair(h, u), rel=1e-12)


def test_dual_density_requires_compact_support(grid):
    bad = np.ones(grid.nodes.size)
    with pytest.raises(ValueError):
        DualDensity(RadialFunction(grid, bad))
