"""Brute-force reference calculations, deliberately independent of the closed forms."""

from .chain import ed_ising_evolve, pair_expectations, partial_trace_pair, reduce_density, three_spin_expectations
from .fock import FockSector, fock_hubbard_evolve
from .lindblad import lindblad_rk4, lindblad_trajectory
from .thermal import clear_cache, ed_thermal_tfim

__all__ = [
    "FockSector",
    "clear_cache",
    "ed_ising_evolve",
    "ed_thermal_tfim",
    "fock_hubbard_evolve",
    "lindblad_rk4",
    "lindblad_trajectory",
    "pair_expectations",
    "partial_trace_pair",
    "reduce_density",
    "three_spin_expectations",
]
