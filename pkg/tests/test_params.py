import math

import pytest
from hypothesis import given, settings, strategies as st

from ising_corner.params import (RegimeError, check_ordered, isotropic_params, make_couplings,
                                 params_from_couplings, params_from_kv, params_from_kw)


def test_isotropic_gives_equal_couplings():
    ps = isotropic_params(0.5)
    assert ps.couplings.H == pytest.approx(ps.couplings.H_prime, rel=1e-13)
    assert ps.w == pytest.approx(ps.q ** 0.25, rel=1e-13)
    # k = 1/(sinh 2H)^2 at the isotropic point
    assert math.sinh(2 * ps.couplings.H) ** -2 == pytest.approx(0.5, rel=1e-13)


def test_dual_variables():
    c = make_couplings(0.7, 0.4)
    assert math.tanh(c.H_star) == pytest.approx(math.exp(-2 * 0.7), rel=1e-15)
    assert c.c_star ** 2 - c.s_star ** 2 == pytest.approx(1.0, rel=1e-14)
    assert c.c_prime == pytest.approx(math.cosh(0.8), rel=1e-14)
    assert c.k == pytest.approx(1 / (math.sinh(1.4) * math.sinh(0.8)), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.05, 0.45))
def test_kw_couplings_roundtrip(k, e):
    ps = params_from_kw(k, e)
    back = params_from_couplings(ps.couplings.H, ps.couplings.H_prime)
    assert back.k == pytest.approx(k, rel=1e-12)
    assert back.v_imag == pytest.approx(ps.v_imag, rel=1e-10)
    assert ps.couplings.k == pytest.approx(k, rel=1e-12)
    assert ps.q ** 0.5 < ps.w < 1


def test_swap_maps_v_to_vbar():
    ps = params_from_kw(0.4, 0.2)
    sw = params_from_couplings(ps.couplings.H_prime, ps.couplings.H)
    assert sw.v_imag == pytest.approx(ps.v_bar_imag, rel=1e-10)


@pytest.mark.parametrize("H,Hp", [(0.2, 0.2), (0.4, 0.3)])
def test_disordered_rejected(H, Hp):
    with pytest.raises(RegimeError):
        params_from_couplings(H, Hp)
    with pytest.raises(RegimeError):
        check_ordered(make_couplings(H, Hp))


def test_nonpositive_couplings_rejected():
    with pytest.raises(RegimeError):
        make_couplings(-0.1, 0.5)


def test_v_range():
    with pytest.raises(RegimeError):
        params_from_kv(0.5, 0.0)
    with pytest.raises(RegimeError):
        params_from_kv(0.5, 10.0)
