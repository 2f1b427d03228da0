"""Couplings of the anisotropic square lattice and their elliptic parametrization."""

from dataclasses import dataclass
import math

from scipy.optimize import brentq

from .elliptic import EllipticParams, jacobi_sn_cn_dn, make_elliptic_params

CRITICAL_MARGIN = 1e-9


class RegimeError(ValueError):
    """Couplings are not in the ordered ferromagnetic regime."""


@dataclass(frozen=True)
class CouplingParams:
    H: float
    H_prime: float
    t: float
    u: float
    H_star: float

    @property
    def c_star(self):
        return (1 + self.t ** 2) / (1 - self.t ** 2)

    @property
    def s_star(self):
        return 2 * self.t / (1 - self.t ** 2)

    @property
    def c_prime(self):
        return (1 + self.u ** 2) / (1 - self.u ** 2)

    @property
    def s_prime(self):
        return 2 * self.u / (1 - self.u ** 2)

    @property
    def k(self):
        return self.t * (1 - self.u ** 2) / (self.u * (1 - self.t ** 2))

    def swapped(self):
        return make_couplings(self.H_prime, self.H)


def make_couplings(H, H_prime):
    """CouplingParams from H (vertical) and H' (horizontal), no regime check."""
    H, H_prime = float(H), float(H_prime)
    if not (H > 0 and H_prime > 0):
        raise RegimeError("couplings must be positive")
    t = math.exp(-2 * H)
    return CouplingParams(H=H, H_prime=H_prime, t=t, u=math.tanh(H_prime), H_star=math.atanh(t))


def check_ordered(c):
    x = math.sinh(2 * c.H) * math.sinh(2 * c.H_prime)
    if x - 1 < CRITICAL_MARGIN:
        raise RegimeError(f"sinh2H sinh2H' = {x!r} is not in the ordered regime (> 1)")


@dataclass(frozen=True)
class ParamSet:
    couplings: CouplingParams
    elliptic: EllipticParams
    v_imag: float
    v_bar_imag: float
    w: float

    @property
    def q(self):
        return self.elliptic.q

    @property
    def k(self):
        return self.elliptic.k


def _t_ratio(y, k, ep):
    # (1-t)/(1+t) = -i sn dn / cn at v/2 = iy/2
    sn, cn, dn = jacobi_sn_cn_dn(0.5j * y, k, ep)
    return (-1j * sn * dn / cn).real


def _u_ratio(y, k, ep):
    sn, cn, dn = jacobi_sn_cn_dn(0.5j * y, k, ep)
    return (-1j * k * sn * cn / dn).real


def _paramset(c, ep, y):
    return ParamSet(couplings=c, elliptic=ep, v_imag=y, v_bar_imag=ep.K_prime - y,
                    w=math.exp(-math.pi * y / (2 * ep.K)))


def params_from_couplings(H, H_prime):
    """Full parameter set from the couplings; v is found by root finding in y."""
    c = make_couplings(H, H_prime)
    check_ordered(c)
    ep = make_elliptic_params(c.k)
    target = (1 - c.t) / (1 + c.t)
    f = lambda y: _t_ratio(y, ep.k, ep) - target
    lo, hi = 1e-12 * ep.K_prime, ep.K_prime * (1 - 1e-12)
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise RegimeError(f"cannot bracket v: residuals {flo!r}, {fhi!r}")
    y = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return _paramset(c, ep, y)


def couplings_from_kv(k, v_imag):
    """Couplings at modulus k and v = i*v_imag, 0 < v_imag < K'."""
    ep = make_elliptic_params(k)
    y = float(v_imag)
    if not (0 < y < ep.K_prime):
        raise RegimeError(f"v_imag must lie in (0, K'={ep.K_prime!r}), got {y!r}")
    # u and t come from the same quotients at vbar = iK' - v
    u = _t_ratio(ep.K_prime - y, k, ep)
    t = _u_ratio(ep.K_prime - y, k, ep)
    H = -0.5 * math.log(t)
    Hp = 0.5 * math.log((1 + u) / (1 - u))
    return make_couplings(H, Hp)


def params_from_kv(k, v_imag):
    c = couplings_from_kv(k, v_imag)
    return _paramset(c, make_elliptic_params(k), float(v_imag))


def isotropic_params(k):
    """Isotropic point v = iK'/2, w = q^{1/4}."""
    ep = make_elliptic_params(k)
    return params_from_kv(k, 0.5 * ep.K_prime)


def params_from_kw(k, w_exponent):
    """Parameter set with w = q**w_exponent, 0 < w_exponent < 1/2."""
    ep = make_elliptic_params(k)
    return params_from_kv(k, 2 * w_exponent * ep.K_prime)
