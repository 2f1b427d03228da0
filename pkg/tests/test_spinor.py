import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ising_corner import exact_finite as ef
from ising_corner import spinor as sp
from ising_corner.params import RegimeError, isotropic_params, make_couplings, params_from_kw


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(2, 4), st.floats(0.1, 1.2), st.floats(0.1, 1.2))
def test_spinor_log_z_matches_enumeration(M, N, H, Hp):
    c = make_couplings(H, Hp)
    spec = ef.LatticeSpec(M, N)
    assert sp.log_z_spinor(spec, c).log_z == pytest.approx(ef.log_z_enumeration(spec, c).log_z, abs=1e-10)


def test_spinor_reaches_beyond_enumeration():
    c = isotropic_params(0.5).couplings
    spec = ef.LatticeSpec(12, 10)
    assert sp.log_z_spinor(spec, c).log_z == pytest.approx(ef.log_z_transfer(spec, c).log_z, abs=1e-9)


def test_representatives_spectrum():
    c = make_couplings(0.6, 0.5)
    v1, v2 = sp.build_representatives(4, c)
    for v in (v1, v2):
        assert np.allclose(v, v.conj().T)
        assert abs(np.linalg.det(v) - 1) < 1e-12
    ev = np.sort(np.linalg.eigvalsh(v1))
    assert ev[0] == pytest.approx(math.exp(-2 * c.H_star), rel=1e-12)
    assert ev[-1] == pytest.approx(math.exp(2 * c.H_star), rel=1e-12)


@pytest.mark.parametrize("N", [2, 3, 6, 9])
def test_roots_structure(N):
    c = params_from_kw(0.5, 0.3).couplings
    sd = sp.roots_of_p(N, c)
    zs = sd.upper
    assert np.allclose(np.abs(zs[:-1]), 1)
    assert np.all(zs[:-1].imag > 0) and np.all(np.diff(zs[:-1].real) > 0)
    assert 0 < zs[-1].real < 1 and zs[-1].imag == 0
    assert sd.poly_residual < 1e-12
    assert np.allclose(sd.roots[N:], 1 / zs[::-1])
    assert np.all(sd.lambdas[:N].real > 1)


def test_roots_need_ordered_phase():
    with pytest.raises(RegimeError):
        sp.roots_of_p(4, make_couplings(0.3, 0.3))


def test_lambda_quadratic_endpoints():
    c = make_couplings(0.7, 0.6)
    assert complex(sp.lambda_quadratic(1.0, c)) == pytest.approx(sp.lambda_at_plus_one(c), rel=1e-13)
    assert complex(sp.lambda_quadratic(-1.0, c)) == pytest.approx(sp.lambda_at_minus_one(c), rel=1e-13)


def test_g_endpoints():
    c = make_couplings(0.7, 0.6)
    for z0, ref in ((1.0, sp.g_at_plus_one(c)), (-1.0, sp.g_at_minus_one(c))):
        near = complex(sp.g_function(z0 * np.exp(1e-6j), c))
        assert near.real == pytest.approx(ref, rel=1e-5)


def test_large_m_and_strip_consistency():
    c = isotropic_params(0.5).couplings
    for N in (6, 8):
        got = sp.strip_quantities(N, c)
        ref = ef.dominant_eigen(N, c)
        assert got[0] == pytest.approx(ref[0], abs=1e-11)
        assert got[1] == pytest.approx(ref[1], abs=1e-9)


def test_e_closed_form_is_large_n_limit():
    c = isotropic_params(0.5).couplings
    diffs = []
    for N in (6, 10, 14):
        sd = sp.large_m_quantities(sp.roots_of_p(N, c), c)
        diffs.append(abs(sd.e_value / sd.e_direct.real - 1))
    assert diffs[0] > diffs[1] > diffs[2]


def test_appendix_b_even_and_odd():
    rng = np.random.default_rng(7)
    for N in (3, 4):
        ang = np.sort(rng.uniform(0.1, 3.0, N - 1))[::-1]
        zs = np.concatenate([np.exp(1j * ang), [0.4]])
        d = sp.appendix_b_identities(zs, 0.6)
        assert abs(d["det_y_product"] / d["det_y_direct"] - 1) < 1e-9
        assert abs(d["det_c_product"] / d["det_c_direct"] - 1) < 1e-9


def test_appendix_c_factorization():
    d = sp.appendix_c_factorization(8, isotropic_params(0.5).couplings)
    assert d["product_rel_err"] < 1e-9


def test_det_q_is_real():
    dq = sp.det_q_finite(ef.LatticeSpec(5, 4), make_couplings(0.5, 0.45))
    assert abs(math.sin(dq.phase)) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 0.8), st.floats(0.12, 0.38), st.integers(2, 7))
def test_eigenvector_gram_is_antidiagonal(k, e, N):
    c = params_from_kw(k, e).couplings
    assume(2 * N > sp.edge_mode_threshold(c))
    sd = sp.roots_of_p(N, c)
    X, Y = sp.eigenvector_matrices(sd, c)
    # common column scaling keeps the identity and evens out magnitudes
    n = np.linalg.norm(Y, axis=0)
    X, Y = X / n, Y / n
    gx, gy = X.T @ X, Y.T @ Y
    S = np.fliplr(np.eye(2 * N))
    W = gx @ S
    scale = np.abs(gx).max()
    assert np.abs(gx - gy).max() < 1e-10 * scale
    assert np.abs(W - np.diag(np.diag(W))).max() < 1e-10 * scale
    assert np.abs(S @ W @ S - W).max() < 1e-10 * scale


def test_eigenvectors_satisfy_representative_equations():
    c = isotropic_params(0.5).couplings
    sd = sp.roots_of_p(6, c)
    X, Y = sp.eigenvector_matrices(sd, c)
    v1, v2 = sp.build_representatives(6, c)
    D = np.diag(sd.lambdas)
    assert np.abs(v2 @ Y - X).max() < 1e-10 * np.abs(X).max()
    assert np.abs(v1 @ X - Y @ D).max() < 1e-10 * np.abs(Y @ D).max()


@pytest.mark.parametrize("k,e", [(0.5, 0.15), (0.75, 0.25), (0.9, 0.35)])
def test_edge_mode_threshold(k, e):
    c = params_from_kw(k, e).couplings
    n_min = int(sp.edge_mode_threshold(c) // 2) + 1
    sp.roots_of_p(n_min, c)
    if n_min > 2:
        with pytest.raises(sp.SpinorError, match="edge-mode"):
            sp.roots_of_p(n_min - 1, c)
