"""Driven-dissipative nonlinear-linear resonator junction.

Two coupled bosonic modes, Kerr nonlinearity on the left one, photon loss
from both. The package builds the Lindblad generator, solves for steady
states and transients, and reports rectification, transport efficiency and
zero-delay photon statistics.
"""

__version__ = "0.1.0"

from .fock import FockSpace, annihilation, creation, embed, expectation, number
from .model import (
    JunctionParams, PumpDirection, ScanOffset, bare_eigenanalysis, build_hamiltonian,
    collapse_operators,
)
from .liouville import liouvillian, steady_state, solve_steady_state
from .dynamics import evolve, fock_transport, integrated_current
from .observables import (
    DiodeFigures, cw_diode_figures, g2, rectification, transport_efficiency,
)

__all__ = [
    "FockSpace", "annihilation", "creation", "embed", "expectation", "number",
    "JunctionParams", "PumpDirection", "ScanOffset", "bare_eigenanalysis",
    "build_hamiltonian", "collapse_operators", "liouvillian", "steady_state",
    "solve_steady_state", "evolve", "fock_transport", "integrated_current",
    "DiodeFigures", "cw_diode_figures", "g2", "rectification", "transport_efficiency",
]
