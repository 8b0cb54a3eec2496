import math

import numpy as np
import pytest

from neckscope.chain import (
    ChainConfig,
    ascr_lower_bound,
    constants_for,
    delta_of_Lb,
)
from neckscope.errors import BelowFloor, InvalidInput
from neckscope.necks import epsilon_prime


def test_delta_value_n3_L16():
    # Direct evaluation of the closed form.
    omega = 4 * math.pi
    num = 1.1 ** 3 * omega * (10 / 9) * 12
    den = (omega / 3) * (16.4 ** 3 - 12.4 ** 3)
    assert delta_of_Lb(3, 16) == pytest.approx(num / den, rel=1e-14)
    assert delta_of_Lb(3, 16) == pytest.approx(0.0212593, rel=1e-5)


def test_delta_monotone_and_floor():
    Ls = np.linspace(16, 4000, 300)
    vals = [delta_of_Lb(3, L) for L in Ls]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    for L in (20, 100, 1000):
        assert delta_of_Lb(3, 2 * L) < delta_of_Lb(3, L)
    with pytest.raises(BelowFloor):
        delta_of_Lb(3, 15.9)
    with pytest.raises(InvalidInput):
        delta_of_Lb(4, 20)


def test_delta_large_L_scaling():
    # (x+2)^n - (x-2)^n ~ 4 n x^(n-1): delta ~ const / L^2 for n = 3.
    d1, d2 = delta_of_Lb(3, 1e4), delta_of_Lb(3, 2e4)
    assert d1 / d2 == pytest.approx(4.0, rel=1e-3)


def test_ascr_lower_bound_floor_value():
    # Golden number from the bisection at the floor constants.
    val = ascr_lower_bound(3, 16.0, 1.0, 0.5)
    assert val == pytest.approx(0.008639, rel=1e-3)
    assert val > 0


def test_ascr_lower_bound_monotone_in_L():
    Ls = np.linspace(16, 2000, 120)
    vals = [ascr_lower_bound(3, L, 1.0, 0.5) for L in Ls]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert ascr_lower_bound(3, 32.0, 1.0, 0.5) > ascr_lower_bound(3, 16.0, 1.0, 0.5)


def test_constants_for_roundtrip():
    cfg = ChainConfig()
    for n in (3, 5):
        for C0 in (1.0, 10.0, 100.0, 1000.0):
            cc = constants_for(n, C0, cfg)
            assert ascr_lower_bound(n, cc.L0, cfg.c(n), cfg.eta1) >= C0
            assert cc.eps_b == pytest.approx(epsilon_prime(0.1, 1, cc.L_b, n=n))
            assert cc.eps0 == min(cfg.eps_a, cc.eps_b)
            assert cc.k0 == cfg.k_a


def test_constants_for_degenerate_and_monotone():
    cfg = ChainConfig()
    cc0 = constants_for(3, 0.0, cfg)
    assert cc0.L_b == max(cfg.L_a, 16.0)
    l1 = constants_for(3, 5.0, cfg).L0
    l2 = constants_for(3, 10.0, cfg).L0
    assert l2 >= l1


def test_provenance_flags():
    cc = constants_for(3, 1.0)
    prov = cc.provenance()
    assert prov["k0"].startswith("configured")
    assert prov["L_b"] == "derived"
