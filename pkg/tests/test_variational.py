import numpy as np
import pytest

import plapext.variational as vr
from plapext.core import Params, RadialFunction, build_grid
from plapext.eigensolver import find_lambda1
from plapext.weights import make_weight


@pytest.fixture(scope="module")
def eig2():
    return find_lambda1(make_weight("linear_r4"), Params(p=2.0, N=3),
                        r_end=200.0)


@pytest.fixture(scope="module")
def eig15():
    return find_lambda1(make_weight("linear_r4"), Params(p=1.5, N=3),
                        r_end=200.0)


@pytest.fixture(scope="module")
def ctx2(eig2):
    return vr.make_context(eig2, build_grid(60.0, 512, N=3))


@pytest.fixture(scope="module")
def ctx15(eig15):
    return vr.make_context(eig15, build_grid(60.0, 512, N=3))


def test_discrete_eigenvalue_close_to_continuum(ctx2, eig2):
    assert ctx2.lam == pytest.approx(eig2.lambda1, rel=1e-3)


def test_ground_state_is_critical(ctx2, ctx15):
    for ctx in (ctx2, ctx15):
        g = vr.energy_gradient(ctx.phi_hat.values, ctx)
        g[0] = 0.0
        assert np.linalg.norm(g) < 1e-9


def test_gradient_matches_finite_differences(ctx15):
    rng = np.random.default_rng(0)
    n = ctx15.grid.nodes.size
    for _ in range(5):
        u = rng.standard_normal(n)
        u[0] = 0.0
        d = rng.standard_normal(n)
        d[0] = 0.0
        d /= np.linalg.norm(d)
        g = vr.energy_gradient(u, ctx15)
        g[0] = 0.0
        eps = 1e-6 * (1.0 + np.linalg.norm(u))
        fd = (vr.energy(u + eps * d, ctx15)
              - vr.energy(u - eps * d, ctx15)) / (2.0 * eps)
        assert fd == pytest.approx(float(g @ d), rel=1e-6, abs=1e-8)


def test_energy_along_eigenaxis_is_exactly_linear(ctx2):
    # J(tau phi_hat) = -tau <h, phi_hat>: homogeneous part vanishes exactly
    h = vr.bump_density(ctx2.grid, center=3.0, width=0.5)
    ctx = vr.with_forcing(ctx2, h)
    for tau in (0.5, -2.0, 10.0):
        expect = -tau * ctx.h_phi1
        assert vr.energy(tau * ctx.phi_hat.values, ctx) == \
            pytest.approx(expect, rel=1e-9, abs=1e-9)


def test_orthogonalized_bump_pairs_to_zero(ctx2):
    h = vr.orthogonalized_bump(ctx2, center=3.0, width=0.5)
    ctx = vr.with_forcing(ctx2, h)
    assert abs(ctx.h_phi1) < 1e-12


def test_slice_minimizer_warm_and_cold_agree(ctx2):
    h = vr.orthogonalized_bump(ctx2, center=3.0, width=0.5)
    ctx = vr.with_forcing(ctx2, h)
    u_a, j_a = vr.minimize_on_slice(0.0, ctx)
    rng = np.random.default_rng(5)
    z = rng.standard_normal(ctx.grid.nodes.size)
    z[0] = z[-1] = 0.0
    u_b, j_b = vr.minimize_on_slice(0.0, ctx, start=z,
                                    method="quasi-newton")
    assert j_a == pytest.approx(j_b, rel=1e-9, abs=1e-9)
    assert np.max(np.abs(u_a.values - u_b.values)) < 1e-6


def test_linear_alternative_verdicts(ctx2):
    tilted = vr.with_forcing(ctx2, vr.bump_density(ctx2.grid, 3.0, 0.5))
    assert vr.solve_resonant(tilted).verdict == "no-solution"
    ortho = vr.with_forcing(
        ctx2, vr.orthogonalized_bump(ctx2, center=3.0, width=0.5))
    rep = vr.solve_resonant(ortho)
    assert rep.verdict == "family"
    assert rep.details["uniqueness_gap"] < 1e-8
    assert max(r for _, r, _ in rep.solutions) < 1e-8


def test_plateau_witness_structure(ctx2):
    w = vr.plateau_witness(ctx2.grid, ctx2.eig.r0)
    v = w.values
    assert v[0] == 0.0 and v[-1] == 0.0
    i0 = int(np.searchsorted(ctx2.grid.nodes, ctx2.eig.r0))
    assert np.ptp(v[i0 - 1:i0 + 2]) == 0.0  # constant around r0


def test_saddle_construction_identity(ctx15):
    h = vr.orthogonalized_bump(ctx15, center=3.0, width=0.5)
    ctx = vr.with_forcing(ctx15, h)
    phiY = vr.plateau_witness(ctx.grid, ctx.eig.r0)
    out = vr.saddle_construction(ctx, phiY, 1e3)
    assert out["identity_residual"] < 1e-10
    assert out["J_plus"] < 0.0 and out["J_minus"] < 0.0
    with pytest.raises(ValueError):
        vr.saddle_construction(ctx, phiY, 1e-6)  # positivity margin fails


def test_saddle_construction_needs_orthogonal_h(ctx15):
    tilted = vr.with_forcing(ctx15, vr.bump_density(ctx15.grid, 3.0, 0.5))
    phiY = vr.plateau_witness(ctx15.grid, ctx15.eig.r0)
    with pytest.raises(ValueError):
        vr.saddle_construction(tilted, phiY, 1e3)


def test_mountain_pass_recovers_synthetic_saddle():
    # double well f = (x^2-1)^2 + 5 y^2: minima at (+-1, 0), saddle (0, 0)
    def fun(z):
        return (z[0] ** 2 - 1.0) ** 2 + 5.0 * z[1] ** 2

    def grad(z):
        return np.array([4.0 * z[0] * (z[0] ** 2 - 1.0), 10.0 * z[1]])

    lo = np.array([-1.0, 0.0])
    hi = np.array([1.0, 0.3])
    x, gn = vr._mpa(fun, grad, lo, hi, beads=16, gtol=1e-4)
    assert np.linalg.norm(x) < 1e-3
    assert gn < 1e-4


def test_coercivity_constants_positive_slope(ctx2):
    h = vr.orthogonalized_bump(ctx2, center=3.0, width=0.5)
    ctx = vr.with_forcing(ctx2, h)
    alpha, beta = vr.coercivity_constants(ctx, T=2.0, trials=60, seed=0)
    assert alpha > 0.0
    assert beta >= 0.0


def test_reduced_profile_flat_for_linear_orthogonal(ctx2):
    h = vr.orthogonalized_bump(ctx2, center=3.0, width=0.5)
    ctx = vr.with_forcing(ctx2, h)
    prof = vr.reduced_profile(ctx, np.linspace(-2.0, 2.0, 9), refine=False)
    assert float(np.ptp(prof.j_values)) < 1e-6 * (1.0 + abs(prof.j_values[0]))
