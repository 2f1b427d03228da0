"""
Four closed forms of the ordered-phase free energies
====================================================

Bulk, two surface and corner free energies evaluated as theta-integrals,
elliptic-function integrals, q-series and infinite products. The surface
term along one edge is also routed through the older Wiener-Hopf form.
"""

import numpy as np

from ising_corner import free_energy as fe
from ising_corner.params import params_from_kw

routes = {
    "theta": fe.free_energies_integral_theta,
    "elliptic": fe.free_energies_integral_elliptic,
    "series": fe.free_energies_series,
    "product": fe.free_energies_product,
}

for k, e in [(0.3, 0.2), (0.5, 0.25), (0.7, 0.3)]:
    ps = params_from_kw(k, e)
    print(f"k={k}  w=q^{e}  H={ps.couplings.H:.6f}  H'={ps.couplings.H_prime:.6f}")
    rows = {name: f(ps).as_array() for name, f in routes.items()}
    for name, v in rows.items():
        print(f"  {name:9s}" + "".join(f"{x:20.15f}" for x in v))
    spread = np.ptp(np.array(list(rows.values())), axis=0)
    print("  spread   " + "".join(f"{x:20.2e}" for x in spread))
    mw = fe.mccoy_wu_fs(ps)
    print("  surface via Wiener-Hopf routes:", {r: f"{v:.15f}" for r, v in mw.items()})

# the corner term does not depend on w at fixed k
ks = np.linspace(0.1, 0.9, 5)
for k in ks:
    fc = [fe.free_energies_series(params_from_kw(k, e)).fc for e in (0.1, 0.25, 0.4)]
    print(f"k={k:.1f}  corner {fc[0]:.15f}  w-spread {np.ptp(fc):.1e}")
