"""Bulk, surface and corner free energies of the ordered phase.

Every value is -beta f, i.e. the coefficient of MN, M, N and 1 in log Z.
Four closed forms are provided (theta integrals on the unit circle,
elliptic-argument integrals, q-series and infinite products) plus an
independent integral for the surface term.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import quad

from .elliptic import jacobi_sn_cn_dn
from .spinor import g_at_minus_one, g_at_plus_one, g_function, rho

_TERM_CUTOFF = 1e-17
_MAX_TERMS = 20000


class QuadratureError(RuntimeError):
    pass


class AnnulusError(ValueError):
    pass


@dataclass(frozen=True)
class FreeEnergies:
    fb: float
    fs: float
    fsp: float
    fc: float
    method: str
    err: tuple = field(default=(0.0, 0.0, 0.0, 0.0))

    def as_array(self):
        return np.array([self.fb, self.fs, self.fsp, self.fc])


# quadrature

def periodic_trapezoid(f, a, b, n0=64, tol=1e-12, n_max=1 << 17):
    """Trapezoid rule on a full period with panel doubling.

    f maps an array of nodes to an array of values (or tuple of arrays).
    Returns the integral(s) once successive doublings agree to tol.
    """
    n = n0
    x = a + (b - a) * np.arange(n) / n
    vals = np.atleast_2d(f(x))
    old = vals.sum(axis=1) * (b - a) / n
    while n < n_max:
        xm = a + (b - a) * (np.arange(n) + 0.5) / n
        vm = np.atleast_2d(f(xm))
        vals = np.concatenate([vals, vm], axis=1)
        n *= 2
        new = vals.sum(axis=1) * (b - a) / n
        if np.all(np.abs(new - old) <= tol * np.maximum(1.0, np.abs(new))):
            return new
        old = new
    raise QuadratureError("trapezoid rule did not converge; too close to criticality?")


def sigma_theta(theta, t, u):
    ct = np.cos(theta)
    return (1 - t * t * u * u) / (1 + t * t * u * u - 2 * t * u * ct) - (u * u - t * t) / (t * t + u * u - 2 * t * u * ct)


def _log_lambda_circle(theta, c):
    x = c.c_prime * c.c_star - c.s_prime * c.s_star * np.cos(theta)
    return np.arccosh(x)


def _log_g_circle(theta, c):
    z = np.exp(1j * theta)
    out = np.empty(theta.shape)
    near1 = np.abs(z - 1) < 1e-12
    nearm1 = np.abs(z + 1) < 1e-12
    rest = ~(near1 | nearm1)
    out[rest] = np.log(g_function(z[rest], c).real)
    out[near1] = math.log(g_at_plus_one(c))
    out[nearm1] = math.log(g_at_minus_one(c))
    return out


def free_energies_integral_theta(ps):
    """The four unit-circle integrals in theta = arg z."""
    c = ps.couplings
    t, u, k = c.t, c.u, ps.k

    def integrand(th):
        ll = _log_lambda_circle(th, c)
        lmu = _log_g_circle(th, c) - ll
        sg = sigma_theta(th, t, u)
        return np.vstack([ll, sg * ll, lmu, sg * lmu])

    i1, i2, i3, i4 = periodic_trapezoid(integrand, 0.0, 2 * math.pi)
    fb = 0.5 * math.log(2 * math.sinh(2 * c.H)) + i1 / (4 * math.pi)
    fs = -c.H_prime + i2 / (8 * math.pi)
    fsp = -c.H - c.H_star + i3 / (4 * math.pi)
    fc = math.log(2) + 0.125 * math.log((1 + k) ** 5 / (1 - k) ** 3) + i4 / (8 * math.pi)
    return FreeEnergies(fb, fs, fsp, fc, "integral_theta")


# functions of the elliptic argument r

def elliptic_integrands(r, ps):
    """A1, A2, B1, B2 at real r."""
    ep, k = ps.elliptic, ps.k
    half = 0.5j * ps.v_imag
    sp, cp, dp = jacobi_sn_cn_dn(r + half, k, ep)
    sm, cm, dm = jacobi_sn_cn_dn(r - half, k, ep)
    _, _, dr = jacobi_sn_cn_dn(r, k, ep)
    _, c2, _ = jacobi_sn_cn_dn(2 * r, k, ep)
    snv = jacobi_sn_cn_dn(2 * half, k, ep)[0]
    lam = 1 / (k * sp * sm)
    a1 = np.log(lam.real)
    a2 = math.log(ep.k_prime) - 2 * np.log(dr.real)
    # z = sn(r - v/2)/sn(r + v/2) runs anticlockwise as r increases; along it
    # d(log z)/dr = +sn(v)(1 - k^2 sn^2 sn^2)/(sn sn) and d(log rho)/dr = -2ik cn(2r)
    dlogz = snv * (1 - k * k * sp ** 2 * sm ** 2) / (sp * sm)
    b1 = (-1j * dlogz).real
    b2 = 2 * k * c2.real
    return a1, a2, b1, b2


def derivative_log_rho(r, ps, h=1e-5):
    """Central-difference d log(rho)/dr along real r, for checking B2."""
    z = lambda x: _z_of_r(x, ps)
    c = ps.couplings
    lp = np.log(rho(z(r + h), c))
    lm = np.log(rho(z(r - h), c))
    return (lp - lm) / (2 * h)


def _z_of_r(r, ps):
    half = 0.5j * ps.v_imag
    sm = jacobi_sn_cn_dn(r - half, ps.k, ps.elliptic)[0]
    sp = jacobi_sn_cn_dn(r + half, ps.k, ps.elliptic)[0]
    return sm / sp


def free_energies_integral_elliptic(ps):
    """The four integrals over the real elliptic argument r in [-K, K]."""
    c, ep, k = ps.couplings, ps.elliptic, ps.k

    def integrand(r):
        a1, a2, b1, b2 = elliptic_integrands(r, ps)
        return np.vstack([a1 * b1, a1 * b2, a2 * b1, a2 * b2])

    i1, i2, i3, i4 = periodic_trapezoid(integrand, -ep.K, ep.K)
    dn_half = jacobi_sn_cn_dn(0.5j * ps.v_imag, k, ep)[2].real
    fb = 0.5 * math.log(2 * math.sinh(2 * c.H)) + i1 / (4 * math.pi)
    fs = -c.H_prime + i2 / (4 * math.pi)
    fsp = -c.H + math.log(dn_half / math.sqrt(ep.k_prime)) + i3 / (4 * math.pi)
    fc = math.log(2) + 0.125 * math.log((1 + k) ** 5 / (1 - k) ** 3) + i4 / (4 * math.pi)
    return FreeEnergies(fb, fs, fsp, fc, "integral_elliptic")


# q-series

def _check_annulus(q, w):
    if not (math.sqrt(q) < w < 1):
        raise AnnulusError(f"w={w!r} outside the annulus (q^(1/2), 1) with q={q!r}")


def final_summands(p, w, m):
    """Per-m summands of the four series in the half-nome p = q^(1/2) and w.

    m is an integer array. p and w may be negative, which is how the
    negated-nome relations are evaluated (direct substitution, termwise).
    Entries the series skip (even m for the last three) are zero.
    """
    m = np.asarray(m, dtype=np.int64)
    mf = m.astype(float)
    pm = np.power(float(p), m)
    qm = pm * pm
    wm = np.power(float(w), m)
    # (q/w)^m stays bounded wherever the series converge; w^-m alone need not
    qw = np.power(float(p) * float(p) / float(w), m)
    odd = (m % 2 == 1)
    a = wm - qw
    sb = (1 - qm) * a * (qw - qm * wm) / (mf * (1 + qm) ** 2 * (1 + qm * qm))
    ss = np.where(odd, 2 * pm * a / (mf * (1 + qm) ** 2), 0.0)
    ssp = np.where(odd, -2 * (qm * wm - qw) / (mf * (1 + qm) ** 2), 0.0)
    sc = np.where(odd, 4 * pm * (1 + qm * qm) / (mf * (1 + qm) ** 2 * (1 - qm)), 0.0)
    return sb, ss, ssp, sc


def sum_series(summand_fn, block=64, max_terms=_MAX_TERMS):
    """Sum the tuple of sequences summand_fn(m) over m >= 1 in blocks.

    Stops once every term in the second half of a block is below the
    relative cutoff of the accumulated sums. Blocks are summed smallest-first.
    """
    totals = None
    start = 1
    while start <= max_terms:
        m = np.arange(start, start + block)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            parts = np.array(summand_fn(m), dtype=float)
        if not np.all(np.isfinite(parts)):
            raise AnnulusError("series terms overflowed; w outside the convergence region?")
        blk = parts[:, ::-1].sum(axis=1)
        totals = blk if totals is None else totals + blk
        if np.all(np.abs(parts[:, -block // 2:]) <= _TERM_CUTOFF * np.maximum(1.0, np.abs(totals))[:, None]):
            return totals
        start += block
        block = min(2 * block, 4096)
    raise AnnulusError("series did not converge; w outside the convergence region?")


def series_sums(p, w):
    """The four sums (bulk, surface, surface', corner) at half-nome p and w."""
    return tuple(float(x) for x in sum_series(lambda m: final_summands(p, w, m)))


def free_energies_series(ps, q=None, w=None):
    """q, w series with the zero-temperature terms H + H', -H', -H and log 2 + log(k')/4."""
    c = ps.couplings
    q = ps.q if q is None else q
    w = ps.w if w is None else w
    _check_annulus(q, w)
    sb, ss, ssp, sc = series_sums(math.sqrt(q), w)
    fb = c.H + c.H_prime + sb
    fs = -c.H_prime + ss
    fsp = -c.H + ssp
    fc = math.log(2) + 0.25 * math.log(ps.elliptic.k_prime) + sc
    return FreeEnergies(fb, fs, fsp, fc, "series")


# infinite products

def _log_prod_terms(q, w, n):
    p = math.sqrt(q)
    n = np.asarray(n, dtype=float)
    L = np.log1p

    def log_s(j):
        return j * (L(-q ** j * w * w) + L(-q ** (j + 1) / (w * w)) - L(-q ** j) - L(-q ** (j + 1)))

    tb = (log_s(2 * n - 1) - log_s(2 * n) + L(-q ** (4 * n - 2)) + L(-q ** (4 * n - 1) * w * w)
          + L(-q ** (4 * n) / (w * w)) - L(-q ** (4 * n)) - L(-q ** (4 * n - 2) * w * w)
          - L(-q ** (4 * n - 1) / (w * w)))
    ts = ((2 * n - 1) * (L(p ** (4 * n - 3) * w) + L(-p ** (4 * n - 1) / w)
                         - L(-p ** (4 * n - 3) * w) - L(p ** (4 * n - 1) / w))
          + 2 * n * (L(-p ** (4 * n - 1) * w) + L(p ** (4 * n + 1) / w)
                     - L(p ** (4 * n - 1) * w) - L(-p ** (4 * n + 1) / w)))
    tsp = ((2 * n - 1) * (L(q ** (2 * n - 1) / w) + L(-q ** (2 * n - 1) * w)
                          - L(-q ** (2 * n - 1) / w) - L(q ** (2 * n - 1) * w))
           + 2 * n * (L(-q ** (2 * n) / w) + L(q ** (2 * n) * w)
                      - L(q ** (2 * n) / w) - L(-q ** (2 * n) * w)))
    tc = ((4 * n - 3) * (L(p ** (4 * n - 3)) - L(-p ** (4 * n - 3)))
          + (4 * n - 1) * (L(-p ** (4 * n - 1)) - L(p ** (4 * n - 1))))
    return tb, ts, tsp, tc


def free_energies_product(ps, q=None, w=None):
    """Logs of the four infinite products."""
    c, k = ps.couplings, ps.k
    q = ps.q if q is None else q
    w = ps.w if w is None else w
    _check_annulus(q, w)
    edge = min(math.log(w) / math.log(q), 0.5 - math.log(w) / math.log(q), 0.5)
    n = np.arange(1, int(60.0 / (-math.log(q) * max(edge, 1e-3) * 2) + 10) + 1)
    terms = _log_prod_terms(q, w, n)
    for tt in terms:
        if np.abs(tt[-1]) > 1e-16:
            raise AnnulusError("product truncation did not converge")
    sb, ss, ssp, sc = (float(np.sum(tt[::-1])) for tt in terms)
    fb = c.H + c.H_prime + sb
    fs = -c.H_prime + ss
    fsp = -c.H + ssp
    fc = math.log(2) + 0.375 * math.log(1 + k) - 0.125 * math.log(1 - k) + sc
    return FreeEnergies(fb, fs, fsp, fc, "product")


# the independent surface integral

def mccoy_wu_taus(c):
    z1 = math.tanh(c.H)
    a1 = z1 * math.exp(-2 * c.H_prime)
    a2 = math.exp(-2 * c.H_prime) / z1
    return (1 - a1) / (1 + a1), (1 - a2) / (1 + a2)


def _u_half(x, tau1, tau2):
    # U^(1/2) at omega = i tan(x), on the branch equal to 1 at omega = 0
    y = np.tan(x)
    phi = np.arctan(y / tau1) + np.arctan(y / tau2)
    return np.exp(-1j * phi)


def _omega_quad(f, tau1, tau2):
    # integral over omega on the imaginary axis of d(omega)/(1 - omega^2) F,
    # written with omega = i tan(x) so d(omega)/(1 - omega^2) = i dx.
    # Conjugate symmetry in x -> -x makes the imaginary part of F integrate
    # to zero, so only Re F is integrated; the value is i times this.
    g = lambda x: f(_u_half(x, tau1, tau2)).real
    val, _ = quad(g, -0.5 * math.pi, 0.5 * math.pi, epsabs=1e-14, epsrel=1e-13, limit=400, points=[0.0])
    return 1j * val


MCCOY_WU_ROUTES = ("raw", "omega", "elliptic", "final")


def mccoy_wu_fs(ps, routes=MCCOY_WU_ROUTES):
    """Surface free energy -beta f_s from the McCoy-Wu integral.

    Routes:
      raw      -log(2 cosh H') - (i/pi) int dw/(1-w^2) log(1 - U^(1/2)) on the imaginary axis
      omega    -H' + (1/2) log tanh H' - J with J the integral of log((1-U^(1/2))/(1+U^(1/2)))
      elliptic the same J written over real r, before integrating by parts
      final    -H' + (1/4pi) int A1 B2 dr after integrating by parts
    The omega-axis integrals use omega = i tan(x), x in (-pi/2, pi/2), which
    maps the infinite axis onto a finite interval. Returns a dict by route.
    """
    out = {}
    c = ps.couplings
    tau1, tau2 = mccoy_wu_taus(c)
    if "raw" in routes:
        val = _omega_quad(lambda s: np.log(1 - s), tau1, tau2)
        out["raw"] = -math.log(2 * math.cosh(c.H_prime)) + (-1j / math.pi * val).real
    if "omega" in routes:
        J = (1j / (2 * math.pi) * _omega_quad(lambda s: np.log((1 - s) / (1 + s)), tau1, tau2)).real
        out["omega"] = -c.H_prime + 0.5 * math.log(math.tanh(c.H_prime)) - J
    ep, k = ps.elliptic, ps.k
    half = 0.5j * ps.v_imag
    if "elliptic" in routes:
        def integrand(r):
            sp, cp, dp = jacobi_sn_cn_dn(r + half, k, ep)
            sm, cm, dm = jacobi_sn_cn_dn(r - half, k, ep)
            a1p = -(cp * dp / sp + cm * dm / sm)
            lr = np.log(rho(sm / sp, c))
            return (-1j / (4 * math.pi) * a1p * lr).real

        out["elliptic"] = -c.H_prime + float(periodic_trapezoid(integrand, -ep.K, ep.K)[0])
    if "final" in routes:
        def integrand2(r):
            a1, _, _, b2 = elliptic_integrands(r, ps)
            return a1 * b2

        out["final"] = -c.H_prime + float(periodic_trapezoid(integrand2, -ep.K, ep.K)[0]) / (4 * math.pi)
    return out


def rho_at_half_v(ps):
    """rho at r = v/2, i.e. z = 0; equals 1/u = coth H'."""
    return rho(0.0, ps.couplings)


# Fourier coefficients in cos(pi m r / K)

def fourier_coefficients(ps, m_max=40):
    """Closed-form Fourier coefficients of A1, A2, B1, B2 for m = 0..m_max.

    Also returns the per-m summands S1..S4 of the four integrals
    K a_m b_m / (4 pi) (m >= 1) and the constant-term products.
    """
    q, w, ep = ps.q, ps.w, ps.elliptic
    K, Kp = ep.K, ep.K_prime
    m = np.arange(0, m_max + 1, dtype=float)
    mm = np.where(m == 0, 1, m)
    qm = q ** m
    odd = (m % 2 == 1)
    a1 = np.where(m == 0, math.pi * (Kp - ps.v_imag) / (2 * K), 2 * (w ** m - qm * w ** (-m)) / (mm * (1 + qm)))
    a2 = np.zeros_like(m)
    a2[odd] = -8 * qm[odd] / (m[odd] * (1 - qm[odd] ** 2))
    b1 = np.where(m == 0, math.pi / K, 2 * math.pi / K * (w ** m + qm * w ** (-m)) / (1 + qm))
    b2 = np.where(odd, 4 * math.pi / K * q ** (m / 2) / (1 + qm), 0.0)
    # integral over [-K, K] of cos^2 is K (m >= 1) and 2K for m = 0
    weight = np.where(m == 0, 2 * K, K) / (4 * math.pi)
    s1, s2, s3, s4 = (weight * x * y for x, y in ((a1, b1), (a1, b2), (a2, b1), (a2, b2)))
    return {"m": m.astype(int), "A1": a1, "A2": a2, "B1": b1, "B2": b2,
            "S1": s1, "S2": s2, "S3": s3, "S4": s4}


def fourier_projection(values_fn, ps, m_max=20, n=512):
    """Numerical cosine coefficients of a 2K-periodic function of r (for checks)."""
    K = ps.elliptic.K
    r = -K + 2 * K * np.arange(n) / n
    v = values_fn(r)
    m = np.arange(0, m_max + 1)
    basis = np.cos(np.pi * np.outer(m, r) / K)
    coef = basis @ v * (2.0 / n)
    coef[0] *= 0.5
    return coef


def log_z_from_free_energies(fe, M, N):
    return M * N * fe.fb + M * fe.fs + N * fe.fsp + fe.fc
