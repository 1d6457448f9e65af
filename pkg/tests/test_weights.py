import math

import numpy as np
import pytest

from plapext.core import Params
from plapext.weights import (check_H, check_W, decay_sup, full_report,
                             make_weight)


def test_make_weight_parses_query_strings():
    W = make_weight("k1?zeta=2&iota=1&p=2.5")
    assert (W.kind, W.zeta, W.iota, W.p) == ("k1", 2.0, 1.0, 2.5)
    assert make_weight("linear_r4").kind == "linear_r4"
    assert make_weight("power?alpha=3").alpha == 3.0
    with pytest.raises(ValueError):
        make_weight("nope")


def test_k1_plateau_and_offplateau_values():
    W = make_weight("k1?zeta=2&iota=1&p=2.5")
    n = 10.0
    inside = n + 0.5 * n ** (-2.0)  # inside [n, n + n^-zeta]
    outside = n + 2.0 * n ** (-2.0)
    assert W.eval(inside) == pytest.approx(
        inside ** (-2.5) / (1.0 + math.log(inside)))
    assert W.eval(outside) == pytest.approx(outside ** (-3.5))


def test_k2_plateau_value_is_r_minus_p():
    W = make_weight("k2?zeta=2&iota=1&p=2.5")
    n = 25.0
    inside = n + 0.5 * n ** (-2.0)
    assert W.eval(inside) * inside ** 2.5 == pytest.approx(1.0)


def test_k3_vanishes_linearly_at_two_for_eta_one():
    W = make_weight("k3?zeta=2&iota=1&p=2.5&eta=1.0")
    assert W.eval(2.0 - 1e-8) == pytest.approx(1e-8, rel=1e-6)


def test_weights_reject_radii_below_one():
    with pytest.raises(ValueError):
        make_weight("linear_r4").eval(0.5)


def test_breakpoints_cover_plateau_edges():
    W = make_weight("k1?zeta=2&iota=1&p=2.5")
    bps = W.breakpoints(1.5, 5.0)
    assert 2.0 in bps and 2.0 + 2.0 ** (-2.0) in bps


def test_k1_satisfies_H_and_decay():
    params = Params(p=2.5, N=4)
    W = make_weight("k1?zeta=2&iota=1&p=2.5")
    assert check_H(W, params, delta=2.0)["pass"]
    assert decay_sup(W)["limit_zero"]


def test_k2_fails_decay_with_unit_tail_sup():
    W = make_weight("k2?zeta=2&iota=1&p=2.5")
    d = decay_sup(W)
    assert not d["limit_zero"]
    assert d["sup"][-1] == pytest.approx(1.0)


def test_k3_condition_W_threshold():
    # p = 2.5: the zero of K at r = 2 ruins local integrability of K^{-1}
    # once eta >= 1, so the inner-weight condition flips at eta = 1
    assert check_W(make_weight("k3?zeta=2&iota=1&p=2.5&eta=0.5"), 2.5)["pass"]
    assert not check_W(make_weight("k3?zeta=2&iota=1&p=2.5&eta=1.5"),
                       2.5)["pass"]


def test_condition_W_is_vacuous_at_or_below_two():
    assert check_W(make_weight("k3?eta=1.5"), 2.0)["pass"]


def test_full_report_shape():
    rep = full_report(make_weight("linear_r4"), Params(p=2.0, N=3))
    d = rep.to_dict()
    assert d["admissible"]["pass"] and d["H"]["pass"]
    assert np.isfinite(d["admissible"]["integral_truncated"])
