import math

import numpy as np
import pytest

from plapext.core import Params
from plapext.eigensolver import (asymptotic_constants, classify_trajectory,
                                 find_lambda1, integrate_radial,
                                 riccati_trace, verify_integral_identity,
                                 verify_log_identity, verify_riccati_ode)
from plapext.weights import make_weight


@pytest.fixture(scope="module")
def oracle():
    return find_lambda1(make_weight("linear_r4"), Params(p=2.0, N=3),
                        r_end=1000.0)


def test_oracle_eigenvalue_and_r0(oracle):
    assert oracle.lambda1 == pytest.approx(math.pi ** 2, rel=1e-8)
    assert oracle.r0 == pytest.approx(2.0, abs=1e-4)


def test_oracle_eigenfunction_profile(oracle):
    c = 1.0 / math.sqrt(2.0 * math.pi)
    rs = np.linspace(1.0, 20.0, 500)
    dev = np.max(np.abs(np.asarray(oracle.phi(rs)) - c * np.sin(math.pi / rs)))
    assert dev < 1e-4


def test_oracle_normalization(oracle):
    assert oracle.norm_value == pytest.approx(1.0, rel=1e-8)


def test_oracle_asymptotic_ratio(oracle):
    C, D = asymptotic_constants(oracle)
    assert D / C == pytest.approx(-1.0, abs=1e-3)
    assert C == pytest.approx(math.pi / math.sqrt(2.0 * math.pi), rel=1e-3)


def test_trajectory_classification_branches():
    W = make_weight("linear_r4")
    params = Params(p=2.0, N=3)
    low = integrate_radial(0.5 * math.pi ** 2, W, params, r_end=200.0)
    near = integrate_radial(math.pi ** 2, W, params, r_end=200.0)
    high = integrate_radial(2.0 * math.pi ** 2, W, params, r_end=200.0)
    assert classify_trajectory(low)[0] == "Subcritical"
    assert classify_trajectory(near)[0] == "Decaying"
    kind, r_cross = classify_trajectory(high)
    assert kind == "Crossing" and r_cross is not None


def test_riccati_identities_on_oracle(oracle):
    tr = riccati_trace(oracle, samples=4000)
    assert tr.U[0] == 0.0
    assert np.min(tr.U) >= -1e-12
    assert np.max(tr.U) <= oracle.params.C_Np + 1e-8
    assert verify_riccati_ode(tr, oracle) < 1e-5
    assert verify_integral_identity(tr, oracle) < 1e-6
    log_res, A_end = verify_log_identity(tr, oracle)
    assert log_res < 1e-6
    # closed form: A_{r0}(inf) = log(pi/2) for the oracle configuration
    assert A_end == pytest.approx(math.log(math.pi / 2.0), abs=1e-3)


def test_plateau_weight_problem_is_decaying_with_positive_lambda():
    # no closed form here: property-based checks only
    W = make_weight("k1?zeta=2&iota=1&p=1.5")
    params = Params(p=1.5, N=3)
    eig = find_lambda1(W, params, r_end=200.0)
    assert eig.lambda1 > 0.0
    tr = riccati_trace(eig, samples=4000)
    assert np.max(tr.U) <= params.C_Np + 1e-8
    assert verify_riccati_ode(tr, eig) < 1e-5
    assert verify_integral_identity(tr, eig) < 1e-5


def test_weight_p_must_match_problem_p():
    # the plateau weights carry their own p; a mismatch silently changes
    # the problem, so the solver refuses it
    W = make_weight("k1?zeta=2&iota=1")  # p defaults to 2.0
    with pytest.raises(ValueError):
        find_lambda1(W, Params(p=2.5, N=4), r_end=50.0)
