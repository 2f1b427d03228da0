"""Jacobi theta functions, Jacobi elliptic functions and complete elliptic integrals.

All routines use the modulus k (never the parameter m = k**2) and a real nome q.
Complex arguments are handled only through theta quotients.
"""

from dataclasses import dataclass
import math

import numpy as np

_REL_CUTOFF = 1e-17
_MAX_TERMS = 400


class EllipticDomainError(ValueError):
    """Raised when a modulus or nome lies outside the supported range."""


def agm(a, b, tol=1e-16):
    """Arithmetic-geometric mean of two positive reals."""
    a, b = float(a), float(b)
    for _ in range(64):
        an, bn = 0.5 * (a + b), math.sqrt(a * b)
        if abs(an - bn) <= tol * an:
            return an
        a, b = an, bn
    return 0.5 * (a + b)


def complete_K(k):
    """Complete elliptic integral of the first kind K(k), modulus convention.

    Computed as pi / (2 agm(1, k')).
    """
    k = float(k)
    if not (0.0 <= k < 1.0):
        raise EllipticDomainError(f"modulus must satisfy 0 <= k < 1, got {k!r}")
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    return math.pi / (2.0 * agm(1.0, kp))


@dataclass(frozen=True)
class EllipticParams:
    k: float
    k_prime: float
    K: float
    K_prime: float
    q: float
    q_prime: float
    p: float


def make_elliptic_params(k):
    """Modulus, quarter periods and nomes for a modulus 0 < k < 1."""
    k = float(k)
    if not (0.0 < k < 1.0):
        raise EllipticDomainError(f"modulus must satisfy 0 < k < 1, got {k!r}")
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    K = complete_K(k)
    Kp = complete_K(kp)
    q = math.exp(-math.pi * Kp / K)
    qp = math.exp(-math.pi * K / Kp)
    return EllipticParams(k=k, k_prime=kp, K=K, K_prime=Kp, q=q, q_prime=qp, p=math.sqrt(q))


def theta(j, z, q):
    """Jacobi theta function theta_j(z, q) for j in 1..4.

    Standard series with nome q, e.g. theta_3 = 1 + 2 sum q^{n^2} cos(2nz).
    z may be a complex scalar or array.
    """
    if not (0.0 <= q < 1.0):
        raise EllipticDomainError(f"nome must satisfy 0 <= q < 1, got {q!r}")
    if j not in (1, 2, 3, 4):
        raise ValueError("theta index must be 1, 2, 3 or 4")
    z = np.asarray(z, dtype=complex)
    if j in (1, 2):
        total = np.zeros_like(z)
        for n in range(_MAX_TERMS):
            c = 2.0 * q ** ((n + 0.5) ** 2)
            if j == 1:
                term = (-1) ** n * c * np.sin((2 * n + 1) * z)
            else:
                term = c * np.cos((2 * n + 1) * z)
            total = total + term
            if _small(term, total, c):
                break
    else:
        total = np.ones_like(z)
        sign = 1.0 if j == 3 else -1.0
        for n in range(1, _MAX_TERMS):
            c = 2.0 * q ** (n * n)
            term = sign ** n * c * np.cos(2 * n * z)
            total = total + term
            if _small(term, total, c):
                break
    return total if total.ndim else complex(total)


def _small(term, total, coeff):
    if coeff == 0.0:
        return True
    return bool(np.all(np.abs(term) <= _REL_CUTOFF * np.abs(total)) or np.all(np.abs(term) < 1e-300))


def theta_null(q):
    """theta_2(0), theta_3(0), theta_4(0) as real numbers."""
    return (theta(2, 0.0, q).real, theta(3, 0.0, q).real, theta(4, 0.0, q).real)


def modulus_from_nome(q):
    """Recover k and k' from the nome via theta_2^2/theta_3^2 and theta_4^2/theta_3^2."""
    t2, t3, t4 = theta_null(q)
    return (t2 / t3) ** 2, (t4 / t3) ** 2


def jacobi_sn_cn_dn(u, k, ep=None):
    """Jacobi sn, cn, dn of a (possibly complex) argument u with modulus k.

    Evaluated as theta quotients with argument pi u / (2K). Raises near the
    pole of sn at iK' (modulo the periods 4K, 2iK').
    """
    if ep is None:
        ep = make_elliptic_params(k)
    u = np.asarray(u, dtype=complex)
    _check_poles(u, ep)
    z = np.pi * u / (2.0 * ep.K)
    t2, t3, t4 = theta_null(ep.q)
    th1, th2, th3, th4 = (theta(j, z, ep.q) for j in (1, 2, 3, 4))
    sn = (t3 / t2) * th1 / th4
    cn = (t4 / t2) * th2 / th4
    dn = (t4 / t3) * th3 / th4
    if u.ndim == 0:
        return complex(sn), complex(cn), complex(dn)
    return sn, cn, dn


def _check_poles(u, ep):
    # poles of sn, cn, dn sit at 2mK + (2n+1)iK'
    re = np.mod(u.real + ep.K, 2.0 * ep.K) - ep.K
    im = np.mod(u.imag + ep.K_prime, 2.0 * ep.K_prime) - ep.K_prime
    d = np.hypot(re, np.abs(im) - ep.K_prime)
    if np.any(d < 1e-8):
        raise EllipticDomainError("argument too close to a pole of sn (iK' modulo periods)")


def kprime_product(q, terms=None):
    """k' as the product over (1 - q^{2m-1})/(1 + q^{2m-1}) raised to the 4th power."""
    total = 0.0
    for m in range(1, terms or _MAX_TERMS):
        x = q ** (2 * m - 1)
        total += math.log1p(-x) - math.log1p(x)
        if terms is None and x < 1e-17:
            break
    return math.exp(4.0 * total)


def khat_product(q):
    """(1 - k)/(1 + k), the complementary modulus at nome q^{1/2}."""
    return kprime_product(math.sqrt(q))
