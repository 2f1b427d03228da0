"""
Singular behaviour near the critical point
==========================================

At fixed w = q^e the free energies are smooth in the dual nome q' apart
from q'^(2 - a) log q' terms. Least-squares fits recover the exponents
and amplitudes; the table is written as CSV for plotting.
"""

import csv
import sys

import numpy as np

from ising_corner.relations import critical_scan, one_minus_k_ratio

w = csv.writer(sys.stdout)
w.writerow(["which", "w_exponent", "alpha", "alpha_hat", "fitted", "expected"])
for e in (0.25, 0.125):
    for which in ("fb", "fs", "fsp", "fc"):
        f = critical_scan(which=which, w_exponent=e)
        w.writerow([which, e, f"{f.alpha:.6f}", f.alpha_hat, f"{f.singular_coefficient:.9f}",
                    f"{f.expected_coefficient:.9f}"])

for qp in np.geomspace(1e-2, 1e-6, 5):
    print(f"q'={qp:.0e}  (1-k)/q' = {one_minus_k_ratio(qp):.6f}")
