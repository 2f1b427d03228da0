import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ellipj, ellipk

from ising_corner.elliptic import (EllipticDomainError, agm, complete_K, jacobi_sn_cn_dn, khat_product,
                                   kprime_product, make_elliptic_params, modulus_from_nome, theta)

moduli = st.floats(0.05, 0.95)


def test_agm_known_value():
    # Gauss constant: agm(1, sqrt 2)
    assert agm(1.0, math.sqrt(2.0)) == pytest.approx(1.1981402347355922, rel=1e-15)


@given(moduli)
def test_complete_k_matches_scipy(k):
    assert complete_K(k) == pytest.approx(ellipk(k * k), rel=1e-14)


def test_complete_k_zero():
    assert complete_K(0.0) == pytest.approx(math.pi / 2, rel=1e-16)


@pytest.mark.parametrize("k", [-0.1, 1.0, 1.5])
def test_complete_k_domain(k):
    with pytest.raises(EllipticDomainError):
        complete_K(k)


@given(moduli)
def test_nome_roundtrip(k):
    ep = make_elliptic_params(k)
    kk, kp = modulus_from_nome(ep.q)
    assert kk == pytest.approx(k, rel=1e-13)
    assert kp == pytest.approx(ep.k_prime, rel=1e-13)
    assert kprime_product(ep.q) == pytest.approx(ep.k_prime, rel=1e-13)
    assert khat_product(ep.q) == pytest.approx((1 - k) / (1 + k), rel=1e-12)


def test_nome_pair_relation():
    ep = make_elliptic_params(0.6)
    assert math.log(ep.q) * math.log(ep.q_prime) == pytest.approx(math.pi ** 2, rel=1e-14)
    assert ep.p == pytest.approx(math.sqrt(ep.q), rel=1e-16)


@pytest.mark.parametrize("j", [1, 2, 3, 4])
@pytest.mark.parametrize("z", [0.3, 0.7 + 0.4j, -1.1 + 0.9j])
def test_theta_matches_mpmath(j, z):
    q = 0.2
    assert theta(j, z, q) == pytest.approx(complex(mpmath.jtheta(j, z, q)), rel=1e-13, abs=1e-15)


def test_theta_bad_index():
    with pytest.raises(ValueError):
        theta(5, 0.1, 0.1)


@given(moduli, st.floats(-3.0, 3.0))
def test_sn_cn_dn_real_matches_scipy(k, u):
    sn, cn, dn, _ = ellipj(u, k * k)
    got = jacobi_sn_cn_dn(u, k)
    assert got[0] == pytest.approx(sn, abs=1e-13)
    assert got[1] == pytest.approx(cn, abs=1e-13)
    assert got[2] == pytest.approx(dn, abs=1e-13)


def test_sn_complex_matches_mpmath():
    k, u = 0.7, 0.4 + 0.8j
    got = jacobi_sn_cn_dn(u, k)
    for name, g in zip(("sn", "cn", "dn"), got):
        ref = complex(mpmath.ellipfun(name, u, m=k * k))
        assert g == pytest.approx(ref, rel=1e-13)


@settings(max_examples=50)
@given(moduli, st.floats(-2.0, 2.0), st.floats(-0.8, 0.8))
def test_jacobi_quadratic_identities(k, x, y):
    ep = make_elliptic_params(k)
    sn, cn, dn = jacobi_sn_cn_dn(complex(x, y * ep.K_prime), k, ep)
    assert abs(sn * sn + cn * cn - 1) < 1e-11 * max(1, abs(sn) ** 2)
    assert abs(k * k * sn * sn + dn * dn - 1) < 1e-11 * max(1, abs(sn) ** 2)


def test_sn_pole_guard():
    ep = make_elliptic_params(0.5)
    with pytest.raises(EllipticDomainError):
        jacobi_sn_cn_dn(1j * ep.K_prime, 0.5, ep)


def test_vectorized_sn():
    u = np.linspace(0, 1, 5)
    sn, _, _ = jacobi_sn_cn_dn(u, 0.5)
    assert sn.shape == (5,)


@pytest.mark.parametrize("u", [0.3, 0.9 + 0.2j])
def test_quarter_period_shifts(u):
    k = 0.6
    ep = make_elliptic_params(k)
    sn_u = jacobi_sn_cn_dn(u, k, ep)[0]
    assert jacobi_sn_cn_dn(u + 2 * ep.K, k, ep)[0] == pytest.approx(-sn_u, abs=1e-12)
    assert jacobi_sn_cn_dn(u + 1j * ep.K_prime, k, ep)[0] == pytest.approx(1 / (k * sn_u), rel=1e-11)
    # reflected shift picks up a minus sign since sn is odd
    assert jacobi_sn_cn_dn(1j * ep.K_prime - u, k, ep)[0] == pytest.approx(-1 / (k * sn_u), rel=1e-11)


def test_modulus_is_theta_square_quotient():
    ep = make_elliptic_params(0.5)
    t2, t3, _ = (theta(j, 0.0, ep.q).real for j in (2, 3, 4))
    assert (t2 / t3) ** 2 == pytest.approx(0.5, rel=1e-14)
    assert (t2 / t3) ** 4 == pytest.approx(0.25, rel=1e-14)
