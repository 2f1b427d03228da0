"""Spinor (free-fermion) reduction of the open-boundary transfer matrices.

The 2^N dimensional transfer matrices are represented by 2N x 2N matrices.
Z of an M x N lattice then reduces to an N x N determinant det Q, whose
large-M form is E G Delta^(M-1) with everything fixed by the zeros of a
polynomial P(z) of degree 2N+2.
"""

from dataclasses import dataclass, replace
import cmath
import math

import numpy as np

from .exact_finite import LatticeResult
from .params import check_ordered


class SpinorError(RuntimeError):
    """Internal consistency check of the spinor reduction failed."""


# representatives and the finite-M determinant

def build_representatives(N, c):
    """The 2N x 2N representatives of V1 and V2 in block form (A, -iB; iB^T, C)."""
    if N < 2:
        raise ValueError("N must be >= 2")
    I = np.eye(N)
    v1 = np.block([[c.c_star * I, -1j * c.s_star * I], [1j * c.s_star * I, c.c_star * I]])
    A = np.diag([1.0] + [c.c_prime] * (N - 1))
    C = np.diag([c.c_prime] * (N - 1) + [1.0])
    B = np.zeros((N, N))
    B[np.arange(1, N), np.arange(N - 1)] = -c.s_prime
    v2 = np.block([[A, -1j * B], [1j * B.T, C]])
    return v1, v2


@dataclass(frozen=True)
class DetQ:
    log_abs: float
    phase: float

    @property
    def value(self):
        with np.errstate(over="ignore"):
            return complex(np.exp(self.log_abs) * cmath.exp(1j * self.phase))


def det_q_finite(spec, c, check=True):
    """det Q for an M x N lattice, Q = (I, -iI) V2 (V1 V2)^(M-1) (I; iI).

    The 2N x N slab is re-orthonormalized by QR after each row and the
    triangular scales are accumulated in log space.
    """
    M, N = spec.M, spec.N
    v1, v2 = build_representatives(N, c)
    slab = v2 @ np.vstack([np.eye(N), 1j * np.eye(N)])
    log_acc = 0.0 + 0.0j
    for _ in range(M - 1):
        slab = v2 @ (v1 @ slab)
        qmat, r = np.linalg.qr(slab)
        d = np.diag(r)
        log_acc += np.sum(np.log(d.astype(complex)))
        slab = qmat
    proj = np.hstack([np.eye(N), -1j * np.eye(N)])
    sign, logdet = np.linalg.slogdet(proj @ slab)
    total = log_acc + logdet + cmath.log(sign)
    phase = math.remainder(total.imag, 2 * math.pi)
    if check and abs(math.sin(phase)) > 1e-8:
        raise SpinorError(f"det Q is not real: relative imaginary part {math.sin(phase):.3e}")
    return DetQ(float(total.real), phase)


def log_z_spinor(spec, c):
    """log Z = (N/2) log 2 + N(M-1)/2 log(2 sinh 2H) + (1/2) log det Q."""
    M, N = spec.M, spec.N
    dq = det_q_finite(spec, c)
    if math.cos(dq.phase) < 0:
        raise SpinorError("det Q is negative")
    lz = 0.5 * N * math.log(2) + 0.5 * N * (M - 1) * math.log(2 * math.sinh(2 * c.H)) + 0.5 * dq.log_abs
    return LatticeResult(spec, lz, "spinor", 1e-12 * max(1.0, abs(lz)))


# the polynomial P(z) and its zeros

def polynomial_p(N, c):
    """Coefficients (highest power first) of z^{2N}(z-tu)(z-u/t) - (1-tuz)(1-uz/t)."""
    t, u = c.t, c.u
    c1 = u * (t + 1 / t)
    coef = np.zeros(2 * N + 3)
    coef[0], coef[1], coef[2] = 1.0, -c1, u * u
    coef[-3] -= u * u
    coef[-2] += c1
    coef[-1] -= 1.0
    return coef


def rho(z, c):
    """sqrt((1-tuz)(uz-t)/((z-tu)(u-tz))) on the branch with positive real part."""
    t, u = c.t, c.u
    z = np.asarray(z, dtype=complex)
    r = np.sqrt((1 - t * u * z) * (u * z - t) / ((z - t * u) * (u - t * z)))
    return np.where(r.real < 0, -r, r)


def lambda_quadratic(z, c):
    """Root of lambda + 1/lambda = 2c'c* - s's*(z + 1/z) with |lambda| >= 1."""
    z = np.asarray(z, dtype=complex)
    x = c.c_prime * c.c_star - 0.5 * c.s_prime * c.s_star * (z + 1 / z)
    lam = x + np.sqrt(x * x - 1)
    return np.where(np.abs(lam) < 1, 1 / lam, lam)


def g_function(z, c):
    """g(z) = (1+z)[1-uz+(u-z)rho] / ((1-z)[1-uz-(u-z)rho])."""
    u = c.u
    z = np.asarray(z, dtype=complex)
    r = rho(z, c)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (1 + z) * (1 - u * z + (u - z) * r) / ((1 - z) * (1 - u * z - (u - z) * r))


def g_at_plus_one(c):
    t, u = c.t, c.u
    return u * (1 + u) * (1 - t) ** 2 / ((1 - u) * (u - t) * (1 - t * u))


def g_at_minus_one(c):
    t, u = c.t, c.u
    return (1 + u) * (u + t) * (1 + t * u) / (u * (1 - u) * (1 - t) ** 2)


def lambda_at_plus_one(c):
    t, u = c.t, c.u
    return (1 - t) * (1 + u) / ((1 + t) * (1 - u))


def lambda_at_minus_one(c):
    t, u = c.t, c.u
    return (1 + t) * (1 + u) / ((1 - t) * (1 - u))


def eigen_amplitudes(z, alpha, N, c):
    """B, B', A, A' and lambda of the plane-wave eigenvector at a zero z of P."""
    u = c.u
    zN = z ** N
    B = 1 - alpha * u * zN
    Bp = 1j * z * (u - alpha * zN)
    A = c.c_prime * B + 1j * c.s_prime * Bp / z
    Ap = -1j * c.s_prime * z * B + c.c_prime * Bp
    lam = (c.c_star * A - 1j * c.s_star * Ap) / B
    return A, Ap, B, Bp, lam


@dataclass(frozen=True)
class SpectralData:
    n: int
    roots: np.ndarray
    alphas: np.ndarray
    lambdas: np.ndarray
    poly_residual: float
    zeta: complex = None
    delta_log: float = None
    g_log: float = None
    e_value: float = None
    e_direct: complex = None

    @property
    def upper(self):
        """z_1 .. z_N."""
        return self.roots[: self.n]


def _newton_polish(coef, z, steps=4):
    d = np.polyder(coef)
    for _ in range(steps):
        p = np.polyval(coef, z)
        dp = np.polyval(d, z)
        step = np.where(dp != 0, p / dp, 0)
        z = z - step
    return z


def edge_mode_threshold(c):
    """2N must exceed this for P to have its real zero in (0, 1).

    It is the slope at z = 1 of log of (1-tuz)(1-uz/t)/((z-tu)(z-u/t)),
    the function z^{2N} has to cross.
    """
    t, u = c.t, c.u
    return (u + t) / (u - t) - (1 + t * u) / (1 - t * u)


def roots_of_p(N, c, circle_tol=1e-8):
    """Zeros of P(z) other than +-1, ordered z_1..z_2N with z_{2N+1-j} = 1/z_j.

    Companion-matrix eigenvalues of P/(z^2-1), Newton-polished against P.
    z_1..z_{N-1} lie on the upper unit semicircle from left to right and
    z_N is the real zero in (0, 1).
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    check_ordered(c)
    if 2 * N <= edge_mode_threshold(c):
        raise SpinorError(f"N={N} is below the edge-mode width {edge_mode_threshold(c) / 2:.3f}; "
                          "P has no real zero in (0, 1)")
    coef = polynomial_p(N, c)
    quot, rem = np.polydiv(coef, np.array([1.0, 0.0, -1.0]))
    if np.max(np.abs(rem)) > 1e-10 * np.max(np.abs(coef)):
        raise SpinorError("z = +-1 are not zeros of P")
    raw = _newton_polish(coef, np.roots(quot).astype(complex))
    on_circle = np.abs(np.abs(raw) - 1) < circle_tol
    upper = raw[on_circle & (raw.imag > 0)]
    real_inside = raw[(~on_circle) & (np.abs(raw.imag) < 1e-10) & (raw.real > 0) & (np.abs(raw) < 1)]
    if len(upper) != N - 1 or len(real_inside) != 1 or np.count_nonzero(on_circle) != 2 * N - 2:
        raise SpinorError(
            f"root classification failed: {np.count_nonzero(on_circle)} on circle, "
            f"{len(real_inside)} real in (0,1); expected {2 * N - 2} and 1")
    upper = upper[np.argsort(upper.real)]
    # put the circle roots exactly on the circle, z_N exactly real
    upper = upper / np.abs(upper)
    zs = np.concatenate([upper, [complex(real_inside[0].real, 0.0)]])
    roots = np.concatenate([zs, 1 / zs[::-1]])
    j = np.arange(1, 2 * N + 1)
    alphas = (-1.0) ** (N - j)
    lams = np.array([eigen_amplitudes(z, a, N, c)[4] for z, a in zip(roots, alphas)])
    scale = np.max(np.abs(coef))
    resid = float(np.max(np.abs(np.polyval(coef, roots))) / scale)
    # branch and pairing assertions
    if np.max(np.abs(alphas[:N] * zs ** N - rho(zs, c))) > 1e-7:
        raise SpinorError("alpha_j z_j^N is not the right-half-plane square root")
    if np.any(lams[:N].real <= 1) or np.max(np.abs(lams[:N].imag)) > 1e-8 * np.max(np.abs(lams[:N])):
        raise SpinorError("lambda_j > 1 violated for j <= N")
    return SpectralData(n=N, roots=roots, alphas=alphas, lambdas=lams, poly_residual=resid)


# large-M quantities

def e_closed_form(c, N):
    """Closed-form E (the large-N limit, the same for both parities of N)."""
    t, u = c.t, c.u
    return ((1 - t) ** (2 * N) * (1 - u * t) * (1 - t * t / (u * u)) ** 0.75
            / (2 ** (N - 2) * (1 - t / u) * (1 - u * u * t * t) ** 0.25 * (1 - t * t) ** 0.5))


def epsilon_n(N):
    return 1.0 if N % 2 == 0 else -1j


def phi_values(sd, c):
    """phi, phi' and eta of the large-M factorization."""
    N, u = sd.n, c.u
    zs, al = sd.upper, sd.alphas[: sd.n]
    zN = zs ** N
    lzeta = np.sum(np.log(zs))
    pre = -N * lzeta + N * cmath.log(-1j)
    lphi = pre + np.sum(np.log(1 + al * u * zN - u * zs - al * zN * zs))
    lphip = pre + np.sum(np.log(1 - al * u * zN - u * zs + al * zN * zs))
    leta = np.sum(np.log((1 + zs) / (1 - zs)))
    return lphi, lphip, leta


def large_m_quantities(sd, c):
    """Fill zeta, delta_log, g_log, e_value (closed form) and e_direct."""
    N = sd.n
    zs = sd.upper
    zeta = complex(np.prod(zs))
    delta_log = float(np.sum(np.log(sd.lambdas[:N].real)))
    g = g_function(zs, c)
    if np.any(g.real <= 0):
        raise SpinorError("g(z_j) left the positive real axis")
    g_log = complex(np.sum(np.log(g)))
    lphi, lphip, leta = phi_values(sd, c)
    if abs(math.remainder((leta + lphi - lphip).imag, 2 * math.pi)) > 1e-6:
        raise SpinorError("G = eta phi / phi' is not positive")
    ldety = log_det_y_product(zs, c.u, N)
    ldetc = log_det_c_product(zs, N)
    le = cmath.log(epsilon_n(N)) + lphi + lphip + 2 * ldetc - leta - ldety
    e_direct = cmath.exp(complex(le.real, math.remainder(le.imag, 2 * math.pi)))
    return replace(sd, zeta=zeta, delta_log=delta_log, g_log=float(g_log.real),
                   e_value=e_closed_form(c, N), e_direct=e_direct)


def log_det_q_large_m(sd, M, which="closed"):
    """log E + log G + (M-1) log Delta with E from the closed form or direct assembly."""
    e = sd.e_value if which == "closed" else sd.e_direct.real
    return math.log(e) + sd.g_log + (M - 1) * sd.delta_log


def strip_quantities(N, c):
    """Large-M strip data (log Lambda, log overlap) from the spinor factorization.

    Same quantities as exact_finite.dominant_eigen but valid for any N.
    """
    sd = large_m_quantities(roots_of_p(N, c), c)
    l2s = math.log(2 * math.sinh(2 * c.H))
    log_lam = 0.5 * N * l2s + 0.5 * sd.delta_log
    log_ov = 0.5 * N * math.log(2) - 0.5 * N * l2s + 0.5 * (math.log(sd.e_direct.real) + sd.g_log) - 0.5 * sd.delta_log
    return log_lam, log_ov


# eigenvectors

def eigenvector_matrices(sd, c):
    """X, Y with columns (x_1..x_N, x'_1..x'_N), (y_1..y_N, y'_1..y'_N)."""
    return (_xy_matrix(sd.roots, sd.alphas, sd.n, -c.u), _xy_matrix(sd.roots, sd.alphas, sd.n, c.u))


def _xy_matrix(Z, A, N, u):
    j = np.arange(1, N + 1)[:, None]
    z, a = np.asarray(Z, dtype=complex)[None, :], np.asarray(A, dtype=float)[None, :]
    top = z ** (j - 1) - z ** (2 * N + 1 - j) - a * u * z ** N * (z ** (j - 1) - z ** (1 - j))
    bot = 1j * u * (z ** j - z ** (2 * N - j)) - 1j * a * z ** N * (z ** j - z ** (-j))
    return np.vstack([top, bot])


def y_matrix(Z, u):
    """Y for an arbitrary list of 2N values z_1..z_2N with alpha_m = (-1)^(N-m)."""
    Z = np.asarray(Z, dtype=complex)
    N = len(Z) // 2
    m = np.arange(1, 2 * N + 1)
    return _xy_matrix(Z, (-1.0) ** (N - m), N, u)


def c_matrix(zs):
    """C_{jk} = z_k^{j-1} + (-1)^{N-k} z_k^{N-j}."""
    zs = np.asarray(zs, dtype=complex)
    N = len(zs)
    j = np.arange(1, N + 1)[:, None]
    a = (-1.0) ** (N - np.arange(1, N + 1))[None, :]
    return zs[None, :] ** (j - 1) + a * zs[None, :] ** (N - j)


# Appendix-style determinant identities

def _log_pair_product(zs, same_parity=None, squared=False):
    total = 0.0 + 0.0j
    n = len(zs)
    for a in range(n):
        for b in range(a + 1, n):
            if same_parity is not None and ((b - a) % 2 == 0) != same_parity:
                continue
            total += cmath.log((zs[a] - zs[b]) * (1 - zs[a] * zs[b]))
    return 2 * total if squared else total


def epsilon_resy(N):
    """Sign constant that makes the reduced det Y product exact (+i for odd N)."""
    return 1.0 if N % 2 == 0 else 1j


def log_det_y_product(zs, u, N=None, minus_i=False):
    """log det Y from its product form for a list z_1..z_N (inverses implied).

    minus_i=True uses -i for odd N, which is off by an overall sign.
    """
    zs = np.asarray(zs, dtype=complex)
    N = len(zs)
    eps = epsilon_n(N) if minus_i else epsilon_resy(N)
    s = N * math.log(2) + cmath.log(eps) + (N - 1) * cmath.log(1 - u * u)
    s += np.sum(2 * np.log(1 - zs ** 2) - 2 * N * np.log(zs))
    return s + _log_pair_product(zs, squared=True)


def log_det_c_product(zs, N=None):
    zs = np.asarray(zs, dtype=complex)
    N = len(zs)
    if N % 2 == 0:
        ct = (N / 2) * math.log(2) + sum(cmath.log((1 - zs[2 * j - 2]) * (1 + zs[2 * j - 1])) for j in range(1, N // 2 + 1))
    else:
        ct = ((N + 1) / 2) * math.log(2) + sum(cmath.log(zs[2 * j - 1] ** 2 - 1) for j in range(1, (N - 1) // 2 + 1))
    return ct + _log_pair_product(zs, same_parity=True)


def appendix_b_identities(z_list, u):
    """Product forms against dense determinants for Y (2N x 2N) and C (N x N).

    Returns a dict with det_y_product, det_y_direct, det_y_minus_i,
    det_c_product, det_c_direct.
    """
    zs = np.asarray(z_list, dtype=complex)
    Z = np.concatenate([zs, 1 / zs[::-1]])
    return {
        "det_y_product": cmath.exp(log_det_y_product(zs, u)),
        "det_y_minus_i": cmath.exp(log_det_y_product(zs, u, minus_i=True)),
        "det_y_direct": complex(np.linalg.det(y_matrix(Z, u))),
        "det_c_product": cmath.exp(log_det_c_product(zs)),
        "det_c_direct": complex(np.linalg.det(c_matrix(zs))),
    }


def valc1(N, u):
    return (u - 1) * (u * u - 1) ** (N // 2 - 1) if N % 2 == 0 else (u * u - 1) ** ((N - 1) // 2)


def valc2(N, u):
    return -(u + 1) * (u * u - 1) ** (N // 2 - 1) if N % 2 == 0 else -1j * (u * u - 1) ** ((N - 1) // 2)


def y_block_identities(Z, u):
    """Block reduction of Y for 2N arbitrary z's.

    Returns the off-block norm of (1/2)[1 + (-1)^N i S] Y B, the two block
    determinants and their product forms, and det Y against the full
    (-2i)^N product over same-parity pairs.
    """
    Z = np.asarray(Z, dtype=complex)
    N = len(Z) // 2
    Y = y_matrix(Z, u)
    S = np.fliplr(np.eye(2 * N))
    perm = np.zeros((2 * N, 2 * N))
    for k in range(1, 2 * N + 1):
        mk = 2 * k - 1 if k <= N else 2 * k - 2 * N
        perm[mk - 1, k - 1] = 1
    yh = 0.5 * (np.eye(2 * N) + (-1) ** N * 1j * S) @ Y @ perm
    off = max(np.abs(yh[:N, N:]).max(), np.abs(yh[N:, :N]).max()) / np.abs(yh).max()
    zo, ze = Z[0::2], Z[1::2]
    d1 = valc1(N, u) * np.prod(1 - zo ** 2) * cmath.exp(_log_pair_product(zo))
    d2 = valc2(N, u) * np.prod(1 - ze ** 2) * cmath.exp(_log_pair_product(ze))
    det_y = complex(np.linalg.det(Y))
    full = (-2j) ** N * (1 - u * u) ** (N - 1) * np.prod(1 - Z ** 2) * cmath.exp(
        _log_pair_product(zo) + _log_pair_product(ze))
    return {
        "off_block": float(off),
        "det_y1": complex(np.linalg.det(yh[:N, :N])), "det_y1_product": complex(d1),
        "det_y2": complex(np.linalg.det(yh[N:, N:])), "det_y2_product": complex(d2),
        "det_yhat": complex(np.linalg.det(yh)),
        "det_yhat_from_y": (-1) ** (N * (N - 1) // 2) * 2.0 ** (-N) * det_y,
        "det_y": det_y, "det_y_full_product": complex(full),
    }


# Appendix-C factorization of P

def _j_pm(z, N, c, sign):
    t, u = c.t, c.u
    z = np.asarray(z, dtype=complex)
    a = np.sqrt((1 - u * t / z) / (1 - t / (u * z)))
    b = np.sqrt((1 - u * t * z) / (1 - t * z / u))
    return z ** N * a + sign * b


def p1_p2(sd):
    """Split the zeros of P by the sign alpha: P2 collects alpha = -1 (with z=-1 for odd N)."""
    N = sd.n
    zs = sd.upper
    al = sd.alphas[:N]
    minus = zs[al < 0]
    plus = zs[al > 0]
    p2 = np.array([1.0 + 0j])
    for z in minus:
        p2 = np.polymul(p2, [1, -(z + 1 / z), 1])
    p1 = np.array([1.0 + 0j])
    for z in plus:
        p1 = np.polymul(p1, [1, -(z + 1 / z), 1])
    if N % 2 == 0:
        p1 = np.polymul(p1, [1, 0, -1])
    else:
        p1 = np.polymul(p1, [1, -1])
        p2 = np.polymul(p2, [1, 1])
    return p1.real, p2.real


def appendix_c_factorization(N, c, samples=16):
    """Check P1 P2 = P, P2 ~ J+ and P1 ~ (1-uz/t)(1-tz/u) J- on |z| = 1."""
    t, u = c.t, c.u
    sd = roots_of_p(N, c)
    p1, p2 = p1_p2(sd)
    coef = polynomial_p(N, c)
    prod = np.polymul(p1, p2)
    zz = np.exp(1j * (np.arange(samples) + 0.5) * 2 * np.pi / samples)
    jp = _j_pm(zz, N, c, +1)
    jm = _j_pm(zz, N, c, -1)
    p2z = np.polyval(p2, zz)
    p1z = np.polyval(p1, zz)
    return {
        "product_rel_err": float(np.max(np.abs(prod - coef)) / np.max(np.abs(coef))),
        "c1_slot": float(prod[1]), "c1_expected": float(-u * (t + 1 / t)),
        "p2_vs_jplus": float(np.max(np.abs(p2z - jp) / np.abs(jp))),
        "p1_vs_jminus": float(np.max(np.abs(p1z - (1 - u * zz / t) * (1 - t * zz / u) * jm)
                                     / np.abs((1 - u * zz / t) * (1 - t * zz / u) * jm))),
        "p2_at_1": float(np.polyval(p2, 1.0)),
        "p2_at_1_expected": 2 * math.sqrt((1 - u * t) / (1 - t / u)),
        "p2_at_t_over_u": float(np.polyval(p2, t / u)),
        "p2_at_t_over_u_expected": math.sqrt((1 - t * t) / (1 - t * t / (u * u))),
        "p2_at_ut": float(np.polyval(p2, u * t)),
        "p2_at_ut_expected": math.sqrt((1 - u * u * t * t) / (1 - t * t)),
        "scale": (t / u) ** N,
    }
