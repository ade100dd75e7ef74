"""Closed-form pair observables for the exactly solvable spin models."""

from .hubbard import HubbardParams, canted_f, hubbard_propagator, hubbard_quench
from .ising import IsingParams, ising_coherent, ising_dissipative
from .tfim import CONVENTION_MAP, TfimParams, tfim_correlations, tfim_Dn

__all__ = [
    "CONVENTION_MAP",
    "HubbardParams",
    "IsingParams",
    "TfimParams",
    "canted_f",
    "hubbard_propagator",
    "hubbard_quench",
    "ising_coherent",
    "ising_dissipative",
    "tfim_Dn",
    "tfim_correlations",
]
