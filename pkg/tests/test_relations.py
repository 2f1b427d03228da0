import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ising_corner import free_energy as fe
from ising_corner import relations as rel
from ising_corner.params import isotropic_params, params_from_kw

points = st.tuples(st.floats(0.2, 0.8), st.floats(0.12, 0.38))


def test_log_series_identities():
    ps = params_from_kw(0.5, 0.3)
    H = ps.couplings.H
    p, w = math.sqrt(ps.q), ps.w
    assert rel.log_2sinh2h_minus_2h_series(p, w) == pytest.approx(math.log(2 * math.sinh(2 * H)) - 2 * H, abs=1e-14)
    assert rel.log_tanh_h_series(p, w) == pytest.approx(math.log(math.tanh(H)), abs=1e-14)


@settings(max_examples=10, deadline=None)
@given(points)
def test_inversion_and_rotation(pt):
    ps = params_from_kw(*pt)
    inv, rot = rel.check_inversion(ps), rel.check_rotation(ps)
    for key in ("fb", "fs", "fsp", "fc"):
        assert abs(inv[key]) < 1e-11
        assert abs(rot[key]) < 1e-12


def test_rotated_params_swap_couplings():
    ps = params_from_kw(0.5, 0.2)
    r = rel.rotated_params(ps)
    assert r.w == pytest.approx(math.sqrt(ps.q) / ps.w, rel=1e-12)


def test_laurent_reconstruction():
    out = rel.laurent_reconstruction(params_from_kw(0.5, 0.3).q, m_max=12)
    assert out["max_deviation"] < 1e-14
    assert out["free"] == ["c4,0"]


@pytest.mark.parametrize("form", ["res1", "res2", "final"])
def test_summand_structure(form):
    quads = rel.summand_structure(params_from_kw(0.6, 0.3), 41, form)
    res = [q.residual for q in quads if q.m % 2 and not math.isnan(q.residual)]
    assert res and max(res) < 1e-13


@pytest.mark.parametrize("form", ["res1", "res2"])
def test_assembled_forms_equal_series(form):
    ps = params_from_kw(0.4, 0.25)
    got = np.asarray(rel.assemble_form(ps, form))
    ref = fe.free_energies_series(ps).as_array()
    assert np.max(np.abs(got - ref)) < 1e-12


def test_fourier_summands_agree_with_res1():
    ps = params_from_kw(0.5, 0.3)
    a = rel.fourier_summands(ps, 21)
    b = rel.summand_structure(ps, 21, "res1")
    for x, y in zip(a, b):
        if x.m % 2:
            assert (x.s1, x.s2, x.s3, x.s4) == pytest.approx((y.s1, y.s2, y.s3, y.s4), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("k", [0.3, 0.5, 0.7])
def test_negation_relations(k):
    r = rel.negation_relations(isotropic_params(k))
    for key in ("fs_negp", "fsp_negw", "fs_negp_vs_negw", "fc_product"):
        assert abs(r[key]) < 1e-10


@pytest.mark.parametrize("delta,alpha", [(0.8, 1.9), (1.2, 2.4), (2.0, 2.0)])
def test_poisson_identities(delta, alpha):
    for f in (rel.poisson_identity, rel.poisson_identity_odd):
        r = f(delta, alpha)
        assert r["lhs"] == pytest.approx(r["rhs"], abs=1e-10)
        assert r["lhs"] == pytest.approx(r["rhs_fourier"], abs=1e-10)


def test_poisson_alpha_guard():
    with pytest.raises(ValueError):
        rel.poisson_identity(1.0, 3.5)


def test_alpha_angles_isotropic():
    a = rel.alpha_angles(0.25)
    assert a["fb"] == pytest.approx(math.pi / 2)


def test_critical_scan_fc():
    f = rel.critical_scan(which="fc")
    assert f.alpha_hat == 2
    assert f.singular_coefficient == pytest.approx(-0.125, rel=1e-6)


def test_critical_grid_guard():
    with pytest.raises(ValueError):
        rel.critical_scan(k_grid=np.array([0.5, 0.6]), which="fb")


def test_one_minus_k_ratio():
    from ising_corner.elliptic import make_elliptic_params
    ep = make_elliptic_params(0.9999)
    assert rel.one_minus_k_ratio(ep.q_prime) == pytest.approx((1 - ep.k) / ep.q_prime, rel=1e-10)
    assert rel.one_minus_k_ratio(1e-6) == pytest.approx(8.0, rel=1e-4)
