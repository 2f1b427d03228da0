"""Named verification suites with one central tolerance table.

Every check carries the acceptance-criterion number it belongs to and a
kind: "criterion" checks decide pass/fail, "supplementary" checks are
extra evidence at other sizes, "info" lines only report a number.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import exact_finite as ef
from . import free_energy as fe
from . import relations as rel
from . import spinor as sp
from .params import isotropic_params, make_couplings, params_from_kw

TOLERANCES = {
    "spinor_vs_enum": 1e-10,
    "transfer_vs_enum": 1e-11,
    "four_way": 1e-10,
    "finite_size": 1e-6,
    "corner_v_independence": 1e-4,
    "large_m": 1e-6,
    "e_closed_factor": 10.0,
    "appendix_b": 1e-9,
    "mccoy_wu": 1e-8,
    "inversion": 1e-11,
    "rotation": 1e-12,
    "termwise": 1e-15,
    "summand": 1e-13,
    "magnetization": 1e-10,
    "laurent": 1e-14,
    "critical_rel": 0.05,
    "poisson": 1e-10,
}

COUPLING_GRID = ((0.4, 0.3), (0.6, 0.6), (0.8, 0.35))
SIZE_GRID = (2, 3, 4)
FORM_GRID_K = (0.3, 0.5, 0.7)
FORM_GRID_E = (0.20, 0.25, 0.30)
SUITES = ("forms", "spinor", "appendix", "relations", "critical")


@dataclass
class Check:
    name: str
    criterion: int
    value: float
    tol: float
    passed: bool
    kind: str = "criterion"
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return {"name": self.name, "criterion": self.criterion, "value": self.value, "tol": self.tol,
                "passed": self.passed, "kind": self.kind, "detail": self.detail}


def _tol(tols, name):
    return (tols or {}).get(name, TOLERANCES[name])


def _check(name, crit, value, tol, kind="criterion", **detail):
    value = float(value)
    return Check(name, crit, value, tol, bool(value <= tol), kind, detail)


# suite: spinor (criteria 1, 2, 4, 5, 6)

def suite_spinor(tols=None):
    out = []
    worst_s, worst_t = 0.0, 0.0
    for (H, Hp), M, N in itertools.product(COUPLING_GRID, SIZE_GRID, SIZE_GRID):
        c = make_couplings(H, Hp)
        spec = ef.LatticeSpec(M, N)
        ref = ef.log_z_enumeration(spec, c).log_z
        worst_s = max(worst_s, abs(sp.log_z_spinor(spec, c).log_z - ref))
        if M * N <= 20:
            worst_t = max(worst_t, abs(ef.log_z_transfer(spec, c).log_z - ref))
    out.append(_check("spinor_vs_enumeration", 1, worst_s, _tol(tols, "spinor_vs_enum")))
    out.append(_check("transfer_vs_enumeration", 2, worst_t, _tol(tols, "transfer_vs_enum")))
    out.extend(finite_size_checks(tols))
    out.extend(large_m_checks(tols))
    return out


def finite_size_checks(tols=None):
    out = []
    tol = _tol(tols, "finite_size")
    ps = isotropic_params(0.5)
    ref = fe.free_energies_series(ps).as_array()
    got = ef.extract_free_energies(ps.couplings, (12, 14)).as_array()
    out.append(_check("finite_size_N12_14", 4, np.max(np.abs(got - ref)), tol,
                      errors=[float(x) for x in got - ref]))
    got = ef.extract_free_energies(ps.couplings, (40, 42), strip=sp.strip_quantities).as_array()
    out.append(_check("finite_size_spinor_strip_N40_42", 4, np.max(np.abs(got - ref)), tol, "supplementary",
                      errors=[float(x) for x in got - ref]))
    tol5 = _tol(tols, "corner_v_independence")
    pa, pb = params_from_kw(0.5, 0.2), params_from_kw(0.5, 0.3)
    fa = ef.extract_free_energies(pa.couplings, (40, 42), strip=sp.strip_quantities).fc
    fb = ef.extract_free_energies(pb.couplings, (40, 42), strip=sp.strip_quantities).fc
    out.append(_check("corner_v_independence_N40_42", 5, abs(fa - fb), tol5, fc_a=fa, fc_b=fb))
    ta = ef.extract_free_energies(pa.couplings, (14, 16)).fc
    tb = ef.extract_free_energies(pb.couplings, (14, 16)).fc
    out.append(_check("corner_v_independence_transfer_N14_16", 5, abs(ta - tb), tol5, "info", fc_a=ta, fc_b=tb))
    series_gap = abs(fe.free_energies_series(pa).fc - fe.free_energies_series(pb).fc)
    out.append(_check("corner_series_w_free", 5, series_gap, 0.0, "supplementary"))
    return out


def large_m_checks(tols=None):
    out = []
    tol = _tol(tols, "large_m")
    c = isotropic_params(0.5).couplings
    errs = {}
    for N, M in ((8, 24), (10, 32)):
        sd = sp.large_m_quantities(sp.roots_of_p(N, c), c)
        exact = sp.det_q_finite(ef.LatticeSpec(M, N), c).log_abs
        errs[(N, M)] = (abs(exact - sp.log_det_q_large_m(sd, M, "direct")),
                        abs(exact - sp.log_det_q_large_m(sd, M, "closed")))
    e8, e10 = errs[(8, 24)][0], errs[(10, 32)][0]
    out.append(_check("large_m_factorization_N8_M24", 6, e8, tol))
    out.append(Check("large_m_factorization_decreasing", 6, float(e10), float(e8), bool(e10 < e8)))
    out.append(_check("large_m_closed_form_E_N8_M24", 6, errs[(8, 24)][1], tol, "info"))
    return out


# suite: appendix (criteria 7, 8)

def suite_appendix(tols=None, samples=20, seed=1234):
    out = []
    c = isotropic_params(0.5).couplings
    ratio = []
    for N in (6, 8, 10):
        sd = sp.large_m_quantities(sp.roots_of_p(N, c), c)
        rel_diff = abs(sd.e_value - sd.e_direct.real) / abs(sd.e_direct.real)
        bound = _tol(tols, "e_closed_factor") * (c.t / c.u) ** N
        ratio.append(rel_diff)
        out.append(_check(f"e_closed_vs_direct_N{N}", 7, rel_diff, bound, scale=(c.t / c.u) ** N))
    out.append(Check("e_closed_vs_direct_shrinking", 7, ratio[-1], ratio[0],
                     bool(ratio[0] > ratio[1] > ratio[2])))
    rng = np.random.default_rng(seed)
    tol = _tol(tols, "appendix_b")
    worst = {"det_y": 0.0, "det_c": 0.0, "valc": 0.0, "minus_i_ratio_odd": 0.0}
    for N in (3, 4, 5, 6):
        for _ in range(samples):
            zs = random_admissible_roots(N, rng)
            u = float(rng.uniform(0.1, 0.9))
            d = sp.appendix_b_identities(zs, u)
            worst["det_y"] = max(worst["det_y"], abs(d["det_y_product"] / d["det_y_direct"] - 1))
            worst["det_c"] = max(worst["det_c"], abs(d["det_c_product"] / d["det_c_direct"] - 1))
            Z = np.concatenate([zs, 1 / zs[::-1]])
            b = sp.y_block_identities(Z, u)
            worst["valc"] = max(worst["valc"], abs(b["det_y1_product"] / b["det_y1"] - 1),
                                abs(b["det_y2_product"] / b["det_y2"] - 1))
            if N % 2:
                worst["minus_i_ratio_odd"] = max(worst["minus_i_ratio_odd"],
                                                 abs(d["det_y_minus_i"] / d["det_y_direct"] + 1))
    out.append(_check("appendix_b_det_y", 8, worst["det_y"], tol))
    out.append(_check("appendix_b_det_c", 8, worst["det_c"], tol))
    out.append(_check("appendix_b_block_prefactors", 8, worst["valc"], tol))
    out.append(_check("appendix_b_minus_i_odd_sign_is_minus_one", 8, worst["minus_i_ratio_odd"], tol, "info"))
    for N in (6, 10):
        d = sp.appendix_c_factorization(N, c)
        out.append(_check(f"appendix_c_product_N{N}", 8, d["product_rel_err"], tol, "supplementary"))
    return out


def random_admissible_roots(N, rng):
    """N - 1 points on the upper unit semicircle plus one real point in (0, 1)."""
    angles = np.sort(rng.uniform(0.05, math.pi - 0.05, N - 1))[::-1]
    return np.concatenate([np.exp(1j * angles), [rng.uniform(0.1, 0.9)]]).astype(complex)


# suite: forms (criteria 3, 9, 12)

def suite_forms(tols=None):
    out = []
    tol = _tol(tols, "four_way")
    worst = 0.0
    methods = (fe.free_energies_integral_theta, fe.free_energies_integral_elliptic,
               fe.free_energies_series, fe.free_energies_product)
    for k, e in itertools.product(FORM_GRID_K, FORM_GRID_E):
        ps = params_from_kw(k, e)
        vals = [m(ps).as_array() for m in methods]
        for a, b in itertools.combinations(vals, 2):
            worst = max(worst, float(np.max(np.abs(a - b))))
    out.append(_check("four_way_agreement", 3, worst, tol))
    tol = _tol(tols, "mccoy_wu")
    worst = 0.0
    for k, e in ((0.3, 0.2), (0.5, 0.25), (0.7, 0.3)):
        ps = params_from_kw(k, e)
        ref = fe.free_energies_series(ps).fs
        for v in fe.mccoy_wu_fs(ps).values():
            worst = max(worst, abs(v - ref))
    out.append(_check("mccoy_wu_equivalence", 9, worst, tol))
    tol = _tol(tols, "magnetization")
    worst = 0.0
    for k in FORM_GRID_K:
        worst = max(worst, abs(rel.negation_relations(isotropic_params(k))["fc_product"]))
    out.append(_check("corner_magnetization_identity", 12, worst, tol))
    return out


# suite: relations (criteria 10, 11, 13, 15)

def suite_relations(tols=None):
    out = []
    inv = rot = term = 0.0
    for k, e in itertools.product(FORM_GRID_K, FORM_GRID_E):
        ps = params_from_kw(k, e)
        r = rel.check_inversion(ps)
        inv = max(inv, *(abs(r[x]) for x in ("fb", "fs", "fsp", "fc")))
        term = max(term, r["fs_termwise"])
        r = rel.check_rotation(ps)
        rot = max(rot, *(abs(r[x]) for x in ("fb", "fs", "fsp", "fc")))
    out.append(_check("inversion_relations", 10, inv, _tol(tols, "inversion")))
    out.append(_check("rotation_relations", 10, rot, _tol(tols, "rotation")))
    out.append(_check("fs_inversion_termwise", 10, term, _tol(tols, "termwise")))
    worst = 0.0
    for k, e in ((0.5, 0.3), (0.7, 0.2)):
        quads = rel.summand_structure(params_from_kw(k, e), 99, "res1")
        worst = max(worst, max(qd.residual for qd in quads if qd.m % 2))
    out.append(_check("summand_product_identity", 11, worst, _tol(tols, "summand")))
    lr = rel.laurent_reconstruction(params_from_kw(0.5, 0.3).q, 30)
    out.append(_check("laurent_coefficients", 13, lr["max_deviation"], _tol(tols, "laurent")))
    c4 = max(abs(b.solved[(4, s)]) for b in lr["blocks"][1:] for s in (b.m, -b.m))
    out.append(_check("laurent_c4_zero_off_constant", 13, c4, _tol(tols, "laurent")))
    out.append(Check("laurent_c4_0_free", 13, float(len(lr["free"])), 1.0, lr["free"] == ["c4,0"]))
    worst = 0.0
    for d, a in ((0.8, 1.9), (1.2, 2.4), (2.0, 2.0)):
        for f in (rel.poisson_identity, rel.poisson_identity_odd):
            r = f(d, a, fourier_oracle=False)
            worst = max(worst, abs(r["lhs"] - r["rhs"]))
    out.append(_check("poisson_identities", 15, worst, _tol(tols, "poisson")))
    return out


# suite: critical (criterion 14)

def suite_critical(tols=None):
    out = []
    tol = _tol(tols, "critical_rel")
    fits = {w: rel.critical_scan(which=w) for w in ("fb", "fs", "fsp", "fc")}
    for w in ("fb", "fc"):
        f = fits[w]
        out.append(_check(f"critical_amplitude_{w}", 14, abs(f.singular_coefficient / f.expected_coefficient - 1), tol,
                          fitted=f.singular_coefficient, expected=f.expected_coefficient))
    pattern = tuple(fits[w].alpha_hat for w in ("fb", "fs", "fsp", "fc"))
    out.append(Check("critical_alpha_hat_pattern", 14, float(sum(pattern)), 4.0, pattern == (0, 1, 1, 2),
                     detail={"alpha_hat": list(pattern)}))
    ok = pattern[0] + pattern[3] == pattern[1] + pattern[2]
    out.append(Check("critical_exponent_relation", 14, float(pattern[0] + pattern[3] - pattern[1] - pattern[2]),
                     0.0, ok))
    for w in ("fs", "fsp"):
        f = fits[w]
        out.append(_check(f"critical_amplitude_{w}", 14, abs(f.singular_coefficient / f.expected_coefficient - 1), tol,
                          "supplementary", fitted=f.singular_coefficient, expected=f.expected_coefficient))
    f = rel.critical_scan(which="fb", w_exponent=0.125)
    out.append(_check("critical_amplitude_fb_alpha_3pi_4", 14,
                      abs(f.singular_coefficient / f.expected_coefficient - 1), tol, "supplementary",
                      alpha=f.alpha))
    return out


SUITE_FUNCS = {"forms": suite_forms, "spinor": suite_spinor, "appendix": suite_appendix,
               "relations": suite_relations, "critical": suite_critical}


def run_suite(name, tols=None):
    """Run one named suite, or all of them for name == "all"."""
    if name == "all":
        return [c for s in SUITES for c in SUITE_FUNCS[s](tols)]
    if name not in SUITE_FUNCS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    return SUITE_FUNCS[name](tols)
