"""Exact finite-lattice Ising partition functions and closed-form bulk,
surface and corner free energies of the ordered phase."""

__version__ = "0.1.0"

from .exact_finite import LatticeResult, LatticeSpec, ResourceGuardError, log_z_enumeration, log_z_transfer
from .free_energy import (
    FreeEnergies,
    free_energies_integral_elliptic,
    free_energies_integral_theta,
    free_energies_product,
    free_energies_series,
    mccoy_wu_fs,
)
from .params import RegimeError, isotropic_params, make_couplings, params_from_couplings, params_from_kv, params_from_kw
from .spinor import log_z_spinor

__all__ = [
    "FreeEnergies", "LatticeResult", "LatticeSpec", "RegimeError", "ResourceGuardError",
    "free_energies_integral_elliptic", "free_energies_integral_theta", "free_energies_product",
    "free_energies_series", "isotropic_params", "log_z_enumeration", "log_z_spinor", "log_z_transfer",
    "make_couplings", "mccoy_wu_fs", "params_from_couplings", "params_from_kv", "params_from_kw",
]
