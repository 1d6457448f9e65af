import math

import numpy as np
import pytest

import plapext.quadform as qf
from plapext.core import Params, RadialFunction, build_grid
from plapext.eigensolver import find_lambda1
from plapext.weights import make_weight


@pytest.fixture(scope="module")
def oracle():
    return find_lambda1(make_weight("linear_r4"), Params(p=2.0, N=3),
                        r_end=1000.0)


@pytest.fixture(scope="module")
def degenerate():
    return find_lambda1(make_weight("k1?zeta=2&iota=1&p=2.5"),
                        Params(p=2.5, N=4), r_end=200.0)


def test_a_quadratic_two_sided_bound():
    rng = np.random.default_rng(0)
    for p in (1.5, 2.0, 2.5, 3.0):
        params = Params(p=p, N=4)
        lo, hi = min(1.0, p - 1.0), max(1.0, p - 1.0)
        for _ in range(200):
            a, v = rng.standard_normal(4), rng.standard_normal(4)
            ratio = qf.a_quadratic(a, v, params) / (
                np.linalg.norm(a) ** (p - 2.0) * float(v @ v))
            assert lo - 1e-12 <= ratio <= hi + 1e-12


def test_a_matrix_consistent_with_quadratic():
    params = Params(p=2.5, N=4)
    rng = np.random.default_rng(1)
    a, v = rng.standard_normal(3), rng.standard_normal(3)
    direct = float(v @ qf.a_matrix(a, params) @ v)
    assert direct == pytest.approx(qf.a_quadratic(a, v, params), rel=1e-12)


def test_taylor_sandwich_positive_and_bounded():
    rng = np.random.default_rng(2)
    params = Params(p=3.0, N=4)
    for _ in range(100):
        a, b, v = (rng.standard_normal(4) for _ in range(3))
        ratio, upper = qf.taylor_sandwich(a, b, v, params)
        assert 0.0 < ratio <= upper + 1e-12
        assert upper == pytest.approx((params.p - 1.0) / 2.0)


def test_oracle_pencil_eigenvalues(oracle):
    params = Params(p=2.0, N=3)
    grid = build_grid(200.0, 4096, N=3)
    forms = qf.assemble_discrete(oracle, oracle.weight, grid, params)
    mu1, mu2, gap = qf.simplicity_gap(forms)
    assert mu1 == pytest.approx(math.pi ** 2, rel=1e-3)
    assert mu2 == pytest.approx(4.0 * math.pi ** 2, rel=1e-3)
    assert gap > 0.0


def test_oracle_poincare_constant(oracle):
    params = Params(p=2.0, N=3)
    grid = build_grid(200.0, 4096, N=3)
    forms = qf.assemble_discrete(oracle, oracle.weight, grid, params)
    assert qf.poincare_constant(forms, oracle, params) == pytest.approx(
        0.75, abs=1e-3)


def test_q0_form_is_symmetric_bilinear(oracle):
    params = Params(p=2.0, N=3)
    grid = build_grid(100.0, 512, N=3)
    rng = np.random.default_rng(3)
    vs = []
    for _ in range(3):
        z = rng.standard_normal(grid.nodes.size)
        z[0] = 0.0
        vs.append(RadialFunction(grid, z))
    v, w, x = vs
    forms = qf.assemble_discrete(oracle, oracle.weight, grid, params)
    assert qf.q0_form(v, w, oracle, oracle.weight, params, forms) == \
        pytest.approx(qf.q0_form(w, v, oracle, oracle.weight, params, forms),
                      rel=1e-12)
    lhs = qf.q0_form(RadialFunction(grid, v.values + 2.0 * x.values), w,
                     oracle, oracle.weight, params, forms)
    rhs = (qf.q0_form(v, w, oracle, oracle.weight, params, forms)
           + 2.0 * qf.q0_form(x, w, oracle, oracle.weight, params, forms))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_degenerate_gap_positive_and_stable(degenerate):
    params = Params(p=2.5, N=4)
    gaps = []
    for M in (2048, 4096):
        forms = qf.assemble_discrete(degenerate, degenerate.weight,
                                     build_grid(200.0, M, N=4), params)
        gaps.append(qf.simplicity_gap(forms)[2])
    assert gaps[1] > 0.0
    assert abs(gaps[1] - gaps[0]) / gaps[1] < 0.05


def test_degenerate_poincare_ratios_positive(degenerate):
    params = Params(p=2.5, N=4)
    forms = qf.assemble_discrete(degenerate, degenerate.weight,
                                 build_grid(200.0, 2048, N=4), params)
    ratios = qf.poincare_ratios(forms, degenerate, params, trials=100, seed=0)
    assert np.all(ratios > 0.0)


def test_embedding_inequalities_hold(degenerate):
    params = Params(p=2.5, N=4)
    grid = build_grid(100.0, 1024, N=4)
    rep = qf.test_embedding_inequalities(degenerate, degenerate.weight, grid,
                                         params, trials=100, seed=0)
    assert rep.max_violation_quarter <= 1e-10
    assert rep.max_violation_log <= 1e-10
