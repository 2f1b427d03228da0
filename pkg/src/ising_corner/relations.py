"""Functional relations among the free energies and their near-critical behaviour.

Inversion (v -> 2iK' - v, i.e. w -> q/w) and rotation (v -> iK' - v, i.e.
w -> q^(1/2)/w) relations are checked by direct substitution into the
convergent series. Also: the Laurent-coefficient reconstruction implied by
those relations, the product structure of the per-m summands, the Poisson
resummation identities and fits of the critical singularities.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import quad

from .free_energy import (final_summands, fourier_coefficients, free_energies_series, series_sums,
                          sum_series)
from .params import params_from_kv, params_from_kw


# inversion and rotation

def log_2sinh2h_minus_2h_series(p, w):
    """Series for log(2 sinh 2H) - 2H in the half-nome p and w."""
    def terms(m):
        qm = np.power(p, 2 * m)
        w2 = np.power(w, 2 * m)
        return ((1 - qm) * (2 * qm - w2 - qm * qm / w2) / (m * (1 + qm) * (1 + qm * qm)),)
    return float(sum_series(terms)[0])


def log_tanh_h_series(p, w):
    """Series for log tanh H: -2 sum over odd m of (w^m - q^m w^-m)/(m(1+q^m))."""
    def terms(m):
        qm = np.power(p, 2 * m)
        wm = np.power(w, m)
        return (np.where(m % 2 == 1, -2 * (wm - qm / wm) / (m * (1 + qm)), 0.0),)
    return float(sum_series(terms)[0])


def check_inversion(ps):
    """Residuals of the four inversion relations at the continued point w -> q/w.

    Under v -> 2iK' - v: H -> H + i pi/2 and H' -> -H'. The imaginary
    constants i pi/2 then cancel on both sides, leaving real identities:
      fb:  2H + Sb(w) + Sb(q/w) = log(2 sinh 2H)
      fs:  Ss(w) + Ss(q/w) = 0, termwise
      fs': Ssp(w) - Ssp(q/w) = log tanh H
      fc:  Sc is w-free
    Also checks the two series identities used for the constants.
    """
    c = ps.couplings
    p = math.sqrt(ps.q)
    w, wi = ps.w, ps.q / ps.w
    sb, ss, ssp, sc = series_sums(p, w)
    tb, ts, tsp, tc = series_sums(p, wi)
    m = np.arange(1, 200)
    s_w = final_summands(p, w, m)[1]
    s_i = final_summands(p, wi, m)[1]
    l2s = math.log(2 * math.sinh(2 * c.H))
    ltanh = math.log(math.tanh(c.H))
    return {
        "fb": 2 * c.H + sb + tb - l2s,
        "fs": ss + ts,
        "fs_termwise": float(np.max(np.abs(s_w + s_i))),
        "fsp": ssp - tsp - ltanh,
        "fc": sc - tc,
        "log_2sinh2h_series": log_2sinh2h_minus_2h_series(p, w) - (l2s - 2 * c.H),
        "log_tanh_series": log_tanh_h_series(p, w) - ltanh,
    }


def rotated_params(ps):
    """The parameter set at v -> iK' - v (w -> q^(1/2)/w)."""
    return params_from_kv(ps.k, ps.v_bar_imag)


def check_rotation(ps):
    """Residuals of the rotation relations f(iK'-v) against f(v)."""
    rot = rotated_params(ps)
    a = free_energies_series(ps)
    b = free_energies_series(rot)
    c, cr = ps.couplings, rot.couplings
    return {
        "fb": b.fb - a.fb,
        "fs": b.fs - a.fsp,
        "fsp": b.fsp - a.fs,
        "fc": b.fc - a.fc,
        "swap_H": cr.H - c.H_prime,
        "swap_Hp": cr.H_prime - c.H,
    }


# Laurent coefficients

def final_laurent(q, m):
    """Laurent coefficients c_{i,m} (i = 1..4) read off the final series, for one integer m.

    The zero-temperature terms are excluded; the corner constant
    log 2 + log(k')/4 is folded into c_{4,0} by the caller if wanted.
    """
    n = abs(m)
    c = [0.0, 0.0, 0.0, 0.0]
    if m == 0:
        total = 0.0
        j = 1
        while True:
            qj = q ** j
            term = qj * (1 - qj) / (j * (1 + qj) * (1 + qj * qj))
            total += term
            if abs(term) < 1e-18 * max(abs(total), 1e-300):
                break
            j += 1
        c[0] = total
        return c
    if n % 2 == 0:
        h = n // 2
        qh = q ** h
        # coefficients of w^(2h) and w^(-2h) differ by a factor q^h
        val = -qh * (1 - qh) / (h * (1 + qh) ** 2 * (1 + qh * qh))
        c[0] = val if m > 0 else val * qh
        return c
    qn = q ** n
    if m > 0:
        c[1] = 2 * q ** (n / 2) / (n * (1 + qn) ** 2)
        c[2] = -2 * qn / (n * (1 + qn) ** 2)
    else:
        c[1] = -2 * q ** (n / 2) * qn / (n * (1 + qn) ** 2)
        c[2] = 2 * qn / (n * (1 + qn) ** 2)
    return c


def _inversion_rhs_bulk(q, m):
    # Laurent coefficient of w^m in log(2 sinh 2H) - 2H
    if m == 0:
        total, j = 0.0, 1
        while True:
            qj = q ** j
            term = 2 * qj * (1 - qj) / (j * (1 + qj) * (1 + qj * qj))
            total += term
            if abs(term) < 1e-18 * abs(total):
                return total
            j += 1
    if m % 2:
        return 0.0
    h = abs(m) // 2
    qh = q ** h
    base = -(1 - qh) / (h * (1 + qh) * (1 + qh * qh))
    return base if m > 0 else base * qh * qh


def _inversion_rhs_tanh(q, m):
    # Laurent coefficient of w^m in log tanh H
    if m == 0 or m % 2 == 0:
        return 0.0
    n = abs(m)
    qn = q ** n
    return -2 / (n * (1 + qn)) if m > 0 else 2 * qn / (n * (1 + qn))


@dataclass(frozen=True)
class LaurentBlock:
    m: int
    solved: dict
    expected: dict
    free: tuple
    residual: float


def _laurent_constraints(q, m):
    """Rotation and inversion constraints linking c_{i,m} and c_{i,-m}.

    Each constraint is ((key, coefficient) pairs, right-hand side) with
    key = (i, s); at m = 0 both keys of a pair coincide and add up.
    """
    out = []
    for s in ((m, -m) if m else (0,)):
        out.append(((((1, s), 1.0), ((1, -s), -q ** (-s / 2))), 0.0))
        out.append(((((3, s), 1.0), ((2, -s), -q ** (-s / 2))), 0.0))
        out.append(((((4, s), 1.0), ((4, -s), -q ** (-s / 2))), 0.0))
        out.append(((((1, s), 1.0), ((1, -s), q ** (-s))), _inversion_rhs_bulk(q, s)))
        out.append(((((2, s), 1.0), ((2, -s), q ** (-s))), 0.0))
        out.append(((((3, s), 1.0), ((3, -s), -q ** (-s))), _inversion_rhs_tanh(q, s)))
        out.append(((((4, s), 1.0), ((4, -s), -q ** (-s))), 0.0))
    return out


def laurent_reconstruction(q, m_max=30):
    """Solve the rotation and inversion constraints for the Laurent coefficients.

    With c_{i,m} the coefficient of w^m in -beta f minus its zero-temperature term:
      rotation:  c_{1,m} = q^(-m/2) c_{1,-m},  c_{3,m} = q^(-m/2) c_{2,-m},
                 c_{4,m} = q^(-m/2) c_{4,-m}
      inversion: c_{1,m} + q^(-m) c_{1,-m} = R_m,  c_{2,m} + q^(-m) c_{2,-m} = 0,
                 c_{3,m} - q^(-m) c_{3,-m} = L_m,  c_{4,m} - q^(-m) c_{4,-m} = 0
    where R_m, L_m are the Laurent coefficients of log(2 sinh 2H) - 2H and
    log tanh H. Each m >= 0 block is solved with c_{i,-m} = q^m y_i as
    unknowns, which keeps it well conditioned; coefficients lying in the
    null space of the block are reported as free.
    """
    blocks, free_all = [], []
    dev = 0.0
    for m in range(0, m_max + 1):
        keys = [(i, m) for i in range(1, 5)] + ([(i, -m) for i in range(1, 5)] if m else [])
        col = {key: j for j, key in enumerate(keys)}
        scale = np.array([q ** m if key[1] < 0 else 1.0 for key in keys])
        cons = _laurent_constraints(q, m)
        A = np.zeros((len(cons), len(keys)))
        b = np.zeros(len(cons))
        for r, (coef, rhs) in enumerate(cons):
            for key, v in coef:
                A[r, col[key]] += v
            b[r] = rhs
        A = A * scale
        norm = np.abs(A).max(axis=1)
        if np.any((norm == 0) & (b != 0)):
            raise ArithmeticError(f"inconsistent Laurent constraints at m={m}")
        keep = norm > 0
        A, b = A[keep] / norm[keep, None], b[keep] / norm[keep]
        y, _, rank, _ = np.linalg.lstsq(A, b, rcond=1e-12)
        resid = float(np.max(np.abs(A @ y - b)))
        _, sv, vt = np.linalg.svd(A)
        null = vt[int(np.sum(sv > 1e-12 * sv[0])):]
        free = tuple(f"c{key[0]},{key[1]}" for j, key in enumerate(keys) if np.any(np.abs(null[:, j]) > 1e-8))
        x = y * scale
        solved = {key: (float("nan") if f"c{key[0]},{key[1]}" in free else float(x[col[key]])) for key in keys}
        expected = {}
        for s in ((m, -m) if m else (0,)):
            vals = final_laurent(q, s)
            for i in range(1, 5):
                expected[(i, s)] = vals[i - 1]
        for key in keys:
            if np.isfinite(solved[key]):
                dev = max(dev, abs(solved[key] - expected[key]))
        free_all.extend(free)
        blocks.append(LaurentBlock(m, solved, expected, free, resid))
    return {"blocks": blocks, "max_deviation": dev, "free": free_all}


# summand structure

_TINY = 1e-290

@dataclass(frozen=True)
class SummandQuadruple:
    m: int
    s1: float
    s2: float
    s3: float
    s4: float

    @property
    def residual(self):
        """|S1 S4 - S2 S3| relative to the larger product.

        Evaluated as |1 - (S2/S1)(S3/S4)| so that tiny summands do not
        underflow in the products. nan when a summand is itself so small that
        it has lost precision to gradual underflow.
        """
        if self.s1 == 0 or self.s4 == 0:
            return 0.0 if self.s2 * self.s3 == 0 else 1.0
        if min(abs(self.s1), abs(self.s2), abs(self.s3), abs(self.s4)) < _TINY:
            return float("nan")
        return abs(1 - (self.s2 / self.s1) * (self.s3 / self.s4))


def form_summands(q, w, m, form="res1"):
    """Per-m summands of the four series in one of the forms res1, res2, final."""
    m = np.asarray(m, dtype=np.int64)
    mf = m.astype(float)
    odd = m % 2 == 1
    qm = np.power(q, mf)
    qh = np.power(q, mf / 2)
    wm = np.power(w, mf)
    wi = 1 / wm
    s1 = (wm * wm - qm * qm * wi * wi) / (mf * (1 + qm) ** 2)
    s2 = np.where(odd, 2 * qh * (wm - qm * wi) / (mf * (1 + qm) ** 2), 0.0)
    if form == "res1":
        s3 = np.where(odd, -4 * qm * (wm + qm * wi) / (mf * (1 + qm) ** 2 * (1 - qm)), 0.0)
        s4 = np.where(odd, -8 * qh ** 3 / (mf * (1 + qm) ** 2 * (1 - qm)), 0.0)
    elif form == "res2":
        s3 = np.where(odd, (1 - qm) * (wm + qm * wi) / (mf * (1 + qm) ** 2), 0.0)
        s4 = np.where(odd, 2 * qh * (1 - qm) / (mf * (1 + qm) ** 2), 0.0)
    elif form == "final":
        s1, s2, s3, s4 = final_summands(math.sqrt(q), w, m)
    else:
        raise ValueError(f"unknown form {form!r}")
    return s1, s2, s3, s4


def summand_structure(ps, m_max=99, form="res1"):
    """Per-m summand quadruples; each satisfies S1 S4 = S2 S3."""
    m = np.arange(1, m_max + 1)
    s = form_summands(ps.q, ps.w, m, form)
    return [SummandQuadruple(int(mm), float(a), float(b), float(c), float(d))
            for mm, a, b, c, d in zip(m, *s)]


def fourier_summands(ps, m_max=99):
    """The same quadruples built as products of Fourier coefficients of A and B."""
    fc = fourier_coefficients(ps, m_max)
    return [SummandQuadruple(int(m), float(a), float(b), float(c), float(d))
            for m, a, b, c, d in zip(fc["m"][1:], fc["S1"][1:], fc["S2"][1:], fc["S3"][1:], fc["S4"][1:])]


def assemble_form(ps, form="res1"):
    """The four free energies assembled from one of the intermediate forms."""
    c, ep, k = ps.couplings, ps.elliptic, ps.k
    q, w = ps.q, ps.w
    s1, s2, s3, s4 = sum_series(lambda m: form_summands(q, w, m, form))
    base_b = 0.5 * math.log(2 * math.sinh(2 * c.H)) + math.pi * (ep.K_prime - ps.v_imag) / (4 * ep.K)
    if form == "final":
        return free_energies_series(ps).as_array()
    if form == "res1":
        from .elliptic import jacobi_sn_cn_dn
        dn_half = jacobi_sn_cn_dn(0.5j * ps.v_imag, k, ep)[2].real
        return np.array([base_b + s1, -c.H_prime + s2, -c.H + math.log(dn_half / math.sqrt(ep.k_prime)) + s3,
                         math.log(2) + 0.125 * math.log((1 + k) ** 5 / (1 - k) ** 3) + s4])
    return np.array([base_b + s1, -c.H_prime + s2, -c.H - c.H_star + s3,
                     math.log(2) + 0.125 * math.log((1 + k) ** 3 / (1 - k)) + s4])


# negated half-nome and w

def negation_relations(ps):
    """Relations under p -> -p and w -> -w, compared on real parts.

    Negation leaves e^{4H}, e^{4H'} and k' unchanged, so the zero-temperature
    terms keep their real parts. Returns residuals of
      fs(p,w) + fs(-p,w) = -2H'      fsp(p,w) + fsp(p,-w) = -2H
      fs(-p,w) = fs(p,-w)            exp[fc(p) + fc(-p)] = 4 k'^(1/2)
    and the raw sums for the literal p -> -p reading of the fsp display.
    """
    c = ps.couplings
    p, w = math.sqrt(ps.q), ps.w
    a = series_sums(p, w)
    bp = series_sums(-p, w)
    bw = series_sums(p, -w)
    kp = ps.elliptic.k_prime
    fc = math.log(2) + 0.25 * math.log(kp)
    return {
        "fs_negp": (-c.H_prime + a[1]) + (-c.H_prime + bp[1]) + 2 * c.H_prime,
        "fsp_negw": (-c.H + a[2]) + (-c.H + bw[2]) + 2 * c.H,
        "fsp_negp_sum": a[2] + bp[2],
        "fs_negp_vs_negw": bp[1] - bw[1],
        "fc_product": math.exp((fc + a[3]) + (fc + bp[3])) / (4 * math.sqrt(kp)) - 1,
    }


# Poisson resummation identities

def poisson_f(x, alpha):
    """pi sinh(2 alpha x/pi) / (2 alpha x cosh^2 x), with value 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    a = 2 * alpha * ax / math.pi
    with np.errstate(invalid="ignore", divide="ignore"):
        num = (np.exp(a - 2 * ax) - np.exp(-a - 2 * ax)) / 2
        val = math.pi * num * 4 / ((1 + np.exp(-2 * ax)) ** 2 * 2 * alpha * ax)
    return np.where(ax < 1e-8, 1.0 + 0 * ax, val)


def poisson_g(kappa, alpha):
    """g(kappa) = integral of e^(i kappa x) f(x) over the real line, by quadrature."""
    f = lambda x: float(poisson_f(x, alpha))
    # f decays like exp(-(2 - 2 alpha/pi) x); cut where it is below 1e-20
    x_max = 46.0 / (2 - 2 * alpha / math.pi) + 10.0
    if kappa == 0:
        val, _ = quad(f, 0, x_max, epsabs=1e-15, epsrel=1e-13, limit=1000)
    else:
        val, _ = quad(f, 0, x_max, weight="cos", wvar=kappa, epsabs=1e-14, epsrel=1e-12, limit=1000)
    return 2 * val


def _sinh_over_cosh2(a, b):
    # sinh(a)/cosh(b)^2 for b > 0 without overflow
    return 2 * (np.exp(a - 2 * b) - np.exp(-a - 2 * b)) / (1 + np.exp(-2 * b)) ** 2


def _check_alpha(delta, alpha):
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not (0 < alpha < math.pi):
        raise ValueError("alpha must lie in (0, pi) for the sums to converge")


def _odd_sum(fn, y, n_cap=100000):
    total, n = 0.0, 1
    while n < n_cap:
        term = fn(n)
        total += term
        if abs(term) <= 1e-18 * max(1.0, abs(total)) and y ** n < 1e-18:
            return total
        n += 2
    raise ArithmeticError("slow convergence: delta too small (y close to 1)")


def poisson_identity(delta, alpha, fourier_oracle=True):
    """Both sides of the bulk resummation identity.

    lhs = delta + sum_n pi sinh(2 alpha delta n/pi)/(alpha n cosh^2(delta n))
    rhs = g(0) + R1 + R2 with y = exp(-pi^2/(2 delta)).
    With fourier_oracle, also 2 sum_n g(2 pi n/delta) by direct quadrature.
    """
    _check_alpha(delta, alpha)
    y = math.exp(-math.pi ** 2 / (2 * delta))

    def lhs_terms(m):
        return (math.pi * _sinh_over_cosh2(2 * alpha * delta * m / math.pi, delta * m) / (alpha * m),)

    lhs = delta + float(sum_series(lhs_terms)[0])
    g0 = poisson_g(0.0, alpha)
    r1 = 8 * _odd_sum(lambda n: y ** (2 * n) / (n * (1 - y ** (2 * n)))
                      * (math.sin(n * alpha) / (n * alpha) - math.cos(n * alpha)), y)
    r2 = 8 * math.pi ** 2 / (alpha * delta) * _odd_sum(
        lambda n: y ** (2 * n) * math.sin(n * alpha) / (n * (1 - y ** (2 * n)) ** 2), y)
    out = {"lhs": lhs, "rhs": g0 + r1 + r2, "g0": g0, "R1": r1, "R2": r2, "y": y}
    if fourier_oracle:
        out["rhs_fourier"] = g0 + _fourier_tail(delta, alpha)
    return out


def poisson_identity_odd(delta, alpha, fourier_oracle=True):
    """Both sides of the odd-n resummation identity.

    lhs = sum over odd n of sinh(2 alpha delta n/pi)/(n cosh^2(delta n))
    rhs = alpha (g(0)/2 + R1' + R2')/pi
    """
    _check_alpha(delta, alpha)
    y = math.exp(-math.pi ** 2 / (2 * delta))

    def lhs_terms(m):
        return (np.where(m % 2 == 1, _sinh_over_cosh2(2 * alpha * delta * m / math.pi, delta * m) / m, 0.0),)

    lhs = float(sum_series(lhs_terms)[0])
    g0 = poisson_g(0.0, alpha)
    r1 = -4 * _odd_sum(lambda n: y ** n / (n * (1 + y ** n))
                       * (math.sin(n * alpha) / (n * alpha) - math.cos(n * alpha)), y)
    r2 = -2 * math.pi ** 2 / (alpha * delta) * _odd_sum(
        lambda n: y ** n * math.sin(n * alpha) / (n * (1 + y ** n) ** 2), y)
    out = {"lhs": lhs, "rhs": alpha * (0.5 * g0 + r1 + r2) / math.pi, "g0": g0, "R1": r1, "R2": r2, "y": y}
    if fourier_oracle:
        # restricting the full sum to even n leaves R1' + R2' = sum_j (-1)^j g(pi j/delta)
        out["rhs_fourier"] = alpha * (0.5 * g0 + _fourier_tail(delta, alpha, alternating=True)) / math.pi
    return out


def _fourier_tail(delta, alpha, alternating=False):
    """Image sums by direct quadrature of g.

    Plain: 2 sum_{n>=1} g(2 pi n/delta). Alternating: sum_{j>=1} (-1)^j g(pi j/delta).
    """
    total, n = 0.0, 1
    while n < 2000:
        if alternating:
            g = poisson_g(math.pi * n / delta, alpha)
            total += (-1) ** n * g
        else:
            g = poisson_g(2 * math.pi * n / delta, alpha)
            total += 2 * g
        if abs(g) < 1e-15:
            break
        n += 1
    return total


# critical behaviour

@dataclass(frozen=True)
class CriticalFit:
    which: str
    k_values: tuple
    q_prime: tuple
    singular_coefficient: float
    expected_coefficient: float
    alpha_hat: int
    log_coefficients: tuple
    residual: float
    alpha: float


def alpha_angles(w_exponent):
    """Angles of the bulk and surface resummations at w = q^e."""
    a_b = math.pi * (1 - 2 * w_exponent)
    a_s = 0.5 * a_b
    return {"fb": a_b, "fs": a_s, "fsp": 0.5 * math.pi - a_s, "fc": 0.5 * math.pi}


def expected_singular(which, alpha):
    """Leading singular amplitudes in q' (coefficient of q'^(2-alpha_hat) log q')."""
    if which == "fb":
        return -8 / math.pi * math.sin(alpha)
    if which in ("fs", "fsp"):
        return 4 / math.pi * math.sin(alpha)
    return -0.125


def default_k_grid(n=24):
    """Moduli with 1 - k log-spaced over two decades, 1e-2 down to 1e-4."""
    return tuple(1 - np.geomspace(1e-2, 1e-4, n))


def critical_scan(k_grid=None, which="fb", w_exponent=0.25, poly_degree=4, log_degree=4, tol=1e-6):
    """Fit the singular part of a free energy as k -> 1 at fixed w = q^e.

    With e fixed the resummation angle alpha is fixed and the couplings are
    analytic in the dual nome q'. The free energy is fitted by least squares
    to P(q') + log(q') Q(q') with polynomials P, Q; the lowest power j of q'
    in Q with a non-negligible coefficient gives alpha_hat = 2 - j, and that
    coefficient is the singular amplitude.
    """
    if which not in ("fb", "fs", "fsp", "fc"):
        raise ValueError(f"unknown free energy {which!r}")
    ks = np.asarray(default_k_grid() if k_grid is None else k_grid, dtype=float)
    if np.any(ks <= 0.9) or np.any(ks >= 0.99999):
        raise ValueError("k_grid must lie within (0.9, 0.99999)")
    idx = ("fb", "fs", "fsp", "fc").index(which)
    qp, vals = [], []
    for k in ks:
        ps = params_from_kw(k, w_exponent)
        qp.append(ps.elliptic.q_prime)
        vals.append(free_energies_series(ps).as_array()[idx])
    qp, vals = np.array(qp), np.array(vals)
    span = math.log10(qp.max() / qp.min())
    if len(qp) < poly_degree + log_degree + 3 or span < 1.0:
        raise ValueError("grid too narrow for a well-conditioned fit")
    L = np.log(qp)
    cols = [qp ** j for j in range(poly_degree + 1)] + [L * qp ** j for j in range(log_degree + 1)]
    A = np.array(cols).T
    scale = np.abs(A).max(axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, vals, rcond=None)
    coef = coef / scale
    resid = float(np.max(np.abs(A @ coef - vals)))
    logc = coef[poly_degree + 1:]
    sig = np.nonzero(np.abs(logc) > tol)[0]
    if sig.size == 0 or sig[0] > 2:
        raise ArithmeticError("no logarithmic singularity detected")
    j = int(sig[0])
    alpha = alpha_angles(w_exponent)[which]
    return CriticalFit(which, tuple(ks), tuple(qp), float(logc[j]), expected_singular(which, alpha),
                       2 - j, tuple(float(x) for x in logc), resid, alpha)


def one_minus_k_ratio(q_prime):
    """(1 - k)/q' at a given dual nome; tends to 8 as q' -> 0."""
    from .elliptic import modulus_from_nome
    kp, k = modulus_from_nome(q_prime)
    return (1 - k) / q_prime
