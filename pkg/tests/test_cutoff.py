import math

import numpy as np
import pytest

import plapext.cutoff as co
from plapext.core import Params
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


def test_x_norm_model_matches_closed_form(eig2):
    # p=2, N=3, K=r^-4: phi1 = sin(pi/r)/sqrt(2 pi), x_norm = pi exactly
    assert co.x_norm_model(eig2) == pytest.approx(math.pi, rel=1e-4)


def test_cutoff_infinity_is_c1_and_tracks_phi(eig15):
    u = co.cutoff_infinity(eig15, 32.0)
    dv, dd = u.junction_mismatch()
    assert dv < 1e-10 and dd < 1e-8
    for r in (1.0, 2.0, 10.0, 31.9):
        assert u.value(r) == pytest.approx(co.phi_model(eig15)[0](r),
                                           rel=1e-12, abs=1e-12)
    assert u.value(100.0) == 0.0
    assert min(u.value(r) for r in np.linspace(32.0, 64.0, 200)) >= 0.0


def test_cutoff_infinity_needs_room(eig15):
    with pytest.raises(ValueError):
        co.cutoff_infinity(eig15, 1.5)


def test_step1_rate_follows_decay_exponent(eig15):
    # x_norm increment^p ~ n1^{-m}: log-log slope of increment is -m/p
    m = eig15.params.decay_exponent
    p = eig15.params.p
    ns = np.array([16.0, 32.0, 64.0, 128.0])
    incs = np.array([co.step1_increment(eig15, n) for n in ns])
    slope = np.polyfit(np.log(ns), np.log(incs), 1)[0]
    assert slope == pytest.approx(-m / p, rel=0.25)


def test_cutoff_boundary_vanishes_near_one(eig15):
    u = co.cutoff_infinity(eig15, 32.0)
    v = co.cutoff_boundary(u, 16.0)
    assert v.value(1.0 + 0.5 / 16.0) == 0.0
    assert v.value(1.0 + 3.0 / 16.0) == pytest.approx(
        u.value(1.0 + 3.0 / 16.0), rel=1e-12)
    dv, dd = v.junction_mismatch()
    assert dv < 1e-10 and dd < 1e-8


def test_cutoff_plateau_is_flat_around_r0(eig15):
    u = co.cutoff_infinity(eig15, 32.0)
    delta = co.default_delta(eig15, 32.0)
    u.meta["delta"] = delta
    v = co.cutoff_boundary(u, 16.0)
    w = co.cutoff_plateau(v, 4.0, delta)
    r0 = eig15.r0
    h = delta / 4.0
    vals = [w.value(r) for r in np.linspace(r0 - 0.9 * h, r0 + 0.9 * h, 11)]
    assert np.ptp(vals) == 0.0
    assert w.deriv(r0) == 0.0
    dv, dd = w.junction_mismatch()
    assert dv < 1e-10 and dd < 1e-8


def test_approximate_in_Y_meets_budget_and_refines(eig2):
    w1, a1 = co.approximate_in_Y(eig2, 0.4)
    w2, a2 = co.approximate_in_Y(eig2, 0.15)
    assert a1 < 0.4 and a2 < 0.15
    assert a2 < a1
    # the result is a valid element of Y: compact support, zero near r=1,
    # flat plateau around r0
    assert w1.value(1.0) == 0.0
    assert w1.value(2.0 * w1.meta["n1"]) == 0.0
    r0, n3, delta = eig2.r0, w1.meta["n3"], w1.meta["delta"]
    h = 0.9 * delta / n3
    assert w1.value(r0 - h) == w1.value(r0 + h) == w1.value(r0)


def test_approximate_in_Y_rejects_bad_epsilon(eig2):
    with pytest.raises(ValueError):
        co.approximate_in_Y(eig2, 0.0)
