"""Two delta-interacting bosons on a ring with a delta barrier, inversion-odd sector.

Units are hbar = m = 1 throughout; couplings are given in the dimensionless
form ``xi = g L`` and ``xi_b = g_B L``.
"""

from ringbethe.core import (
    RapidityPair,
    ScatteringLengths,
    SystemParams,
    energy_of,
    scattering_lengths,
)
from ringbethe.bae import SearchWindow, residual_bae1, residual_bae2, scan_roots
from ringbethe.wavefunction import EigenstateEvaluator, normalize, verify_contracts
from ringbethe.oracle import OracleConfig, OracleResult, odd_sector_spectrum
from ringbethe.strong_coupling import (
    ExpansionParams,
    expansion_energy,
    fit_coefficients,
    orbital_wavenumbers,
)

__all__ = [
    "EigenstateEvaluator",
    "ExpansionParams",
    "OracleConfig",
    "OracleResult",
    "RapidityPair",
    "ScatteringLengths",
    "SearchWindow",
    "SystemParams",
    "energy_of",
    "expansion_energy",
    "fit_coefficients",
    "normalize",
    "odd_sector_spectrum",
    "orbital_wavenumbers",
    "residual_bae1",
    "residual_bae2",
    "scan_roots",
    "scattering_lengths",
    "verify_contracts",
]

__version__ = "0.1.0"
