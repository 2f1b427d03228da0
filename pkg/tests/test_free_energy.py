import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad
from scipy.special import i0

from ising_corner import exact_finite as ef
from ising_corner import free_energy as fe
from ising_corner.params import isotropic_params, params_from_couplings, params_from_kw

ROUTES = (fe.free_energies_series, fe.free_energies_product, fe.free_energies_integral_theta,
          fe.free_energies_integral_elliptic)


def onsager_bulk(H, Hp):
    f = lambda a, b: math.log(math.cosh(2 * H) * math.cosh(2 * Hp) - math.sinh(2 * H) * math.cos(a)
                              - math.sinh(2 * Hp) * math.cos(b))
    val, _ = dblquad(f, 0, math.pi, 0, math.pi, epsabs=1e-13, epsrel=1e-13)
    return math.log(2) + val / (2 * math.pi ** 2)


def test_periodic_trapezoid_bessel():
    val = fe.periodic_trapezoid(lambda x: np.exp(np.cos(x)), 0, 2 * math.pi)
    assert float(np.ravel(val)[0]) == pytest.approx(2 * math.pi * i0(1.0), rel=1e-14)


@pytest.mark.parametrize("H,Hp", [(0.5, 0.6), (0.9, 0.35), (0.45, 1.2)])
def test_bulk_matches_onsager(H, Hp):
    ps = params_from_couplings(H, Hp)
    assert fe.free_energies_series(ps).fb == pytest.approx(onsager_bulk(H, Hp), abs=1e-10)


def test_low_temperature_limit():
    ps = params_from_couplings(3.0, 2.5)
    r = fe.free_energies_series(ps)
    assert r.fb == pytest.approx(5.5, abs=1e-4)
    assert r.fs == pytest.approx(-2.5, abs=1e-4)
    assert r.fsp == pytest.approx(-3.0, abs=1e-4)
    assert r.fc == pytest.approx(math.log(2), abs=1e-4)


@settings(max_examples=12, deadline=None)
@given(st.floats(0.15, 0.85), st.floats(0.12, 0.38))
def test_routes_agree(k, e):
    ps = params_from_kw(k, e)
    vals = [r(ps).as_array() for r in ROUTES]
    for v in vals[1:]:
        assert np.max(np.abs(v - vals[0])) < 1e-10


def test_isotropic_surface_symmetry():
    r = fe.free_energies_series(isotropic_params(0.6))
    assert r.fs == pytest.approx(r.fsp, abs=1e-14)


def test_swap_exchanges_surfaces():
    a = fe.free_energies_series(params_from_couplings(0.7, 0.5))
    b = fe.free_energies_series(params_from_couplings(0.5, 0.7))
    assert (a.fb, a.fs, a.fsp, a.fc) == pytest.approx((b.fb, b.fsp, b.fs, b.fc), abs=1e-12)


def test_annulus_guard():
    ps = isotropic_params(0.5)
    with pytest.raises(fe.AnnulusError):
        fe.free_energies_series(ps, w=1.2)
    with pytest.raises(fe.AnnulusError):
        fe.free_energies_product(ps, w=0.5 * math.sqrt(ps.q))


def test_mccoy_wu_routes():
    ps = params_from_kw(0.6, 0.22)
    ref = fe.free_energies_series(ps).fs
    got = fe.mccoy_wu_fs(ps)
    assert set(got) == set(fe.MCCOY_WU_ROUTES)
    for v in got.values():
        assert v == pytest.approx(ref, abs=1e-10)


def test_rho_at_half_v():
    ps = params_from_kw(0.5, 0.3)
    assert fe.rho_at_half_v(ps) * ps.couplings.u == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("idx,key", [(1, "A2"), (2, "B1"), (3, "B2")])
def test_fourier_coefficients_match_projection(idx, key):
    ps = params_from_kw(0.5, 0.27)
    closed = fe.fourier_coefficients(ps, m_max=20)[key]
    num = fe.fourier_projection(lambda r: np.real(fe.elliptic_integrands(r, ps)[idx]), ps, m_max=20)
    assert np.max(np.abs(closed - num)) < 1e-12


def test_fourier_summands_sum_to_series():
    ps = params_from_kw(0.5, 0.27)
    co = fe.fourier_coefficients(ps, m_max=200)
    ss = fe.series_sums(math.sqrt(ps.q), ps.w)
    assert co["S2"].sum() == pytest.approx(ss[1], abs=1e-13)


def test_free_energies_predict_large_lattice():
    # corrections to the four-term form decay exponentially in the lattice size
    from ising_corner.spinor import log_z_spinor
    ps = isotropic_params(0.3)
    r = fe.free_energies_series(ps)
    errs = [abs(log_z_spinor(ef.LatticeSpec(L, L), ps.couplings).log_z - fe.log_z_from_free_energies(r, L, L))
            for L in (10, 20, 30)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6
