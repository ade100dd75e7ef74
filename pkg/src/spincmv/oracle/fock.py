"""Exact many-fermion evolution of a small open Hubbard chain at ``U = 0``.

The Hamiltonian is built in the fixed-particle-number sector of the Fock
space with Jordan-Wigner signs and applied with a sparse matrix exponential.
Mode ``2 * site + spin`` (spin 0 = up) orders the fermionic operators.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

MAX_SITES = 8

_SIGMAS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class FockSector:
    """Basis of ``L`` fermions on ``2L`` modes with hopping-type operators."""

    def __init__(self, L: int):
        if L > MAX_SITES:
            raise ValueError(f"L={L} exceeds the oracle limit of {MAX_SITES} sites")
        self.L = L
        modes = 2 * L
        self.states = np.array(
            sorted(sum(1 << m for m in c) for c in itertools.combinations(range(modes), L)),
            dtype=np.int64,
        )
        self.dim = len(self.states)

    def hop(self, m1: int, m2: int) -> sp.csr_matrix:
        """Sparse ``c+_{m1} c_{m2}``."""
        s = self.states
        has2 = ((s >> m2) & 1).astype(bool)
        s2 = s ^ (1 << m2)
        sign = 1 - 2 * (np.bitwise_count(s & ((1 << m2) - 1)).astype(np.int64) & 1)
        if m1 != m2:
            ok = has2 & ~((s2 >> m1) & 1).astype(bool)
        else:
            ok = has2
        sign = sign * (1 - 2 * (np.bitwise_count(s2 & ((1 << m1) - 1)).astype(np.int64) & 1))
        s3 = s2 | (1 << m1)
        cols = np.flatnonzero(ok)
        rows = np.searchsorted(s, s3[cols])
        return sp.csr_matrix((sign[cols].astype(complex), (rows, cols)), shape=(self.dim, self.dim))

    def hamiltonian(self, hopping: float) -> sp.csr_matrix:
        h = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for site in range(self.L - 1):
            for spin in range(2):
                a, b = 2 * site + spin, 2 * (site + 1) + spin
                h = h - hopping * (self.hop(a, b) + self.hop(b, a))
        return h

    def spin_operator(self, site: int, mu: int) -> sp.csr_matrix:
        op = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for a in range(2):
            for b in range(2):
                w = _SIGMAS[mu][a, b]
                if w != 0:
                    op = op + w * self.hop(2 * site + a, 2 * site + b)
        return op

    def number(self) -> sp.csr_matrix:
        return sp.diags(np.bitwise_count(self.states).astype(complex))

    def product_state(self, spinors) -> np.ndarray:
        """``prod_j (sum_s spinor_j[s] c+_{j s}) |0>`` with creators in ascending site order."""
        psi = np.zeros(self.dim, dtype=complex)
        for choice in itertools.product(range(2), repeat=self.L):
            amp = np.prod([spinors[j][sp_] for j, sp_ in enumerate(choice)])
            occ = sum(1 << (2 * j + sp_) for j, sp_ in enumerate(choice))
            psi[np.searchsorted(self.states, occ)] += amp
        return psi


def fock_hubbard_evolve(L: int, initial, hopping: float, t: float, pairs):
    """Evolve a one-per-site product state and measure spin observables.

    Parameters
    ----------
    initial : sequence of length-2 spinors, one per site (up, down amplitudes)
    pairs : iterable of ``(q, r)`` site pairs

    Returns
    -------
    dict mapping each pair to ``(b_q, b_r, c_raw)``.
    """
    sector = FockSector(L)
    psi = sector.product_state([np.asarray(v, dtype=complex) for v in initial])
    if t != 0 and hopping != 0:
        psi = expm_multiply(-1j * t * sector.hamiltonian(hopping), psi)
    ops = {}

    def op(site, mu):
        if (site, mu) not in ops:
            ops[(site, mu)] = sector.spin_operator(site, mu)
        return ops[(site, mu)]

    out = {}
    for q, r in pairs:
        b_q = np.array([np.vdot(psi, op(q, m) @ psi).real for m in range(3)])
        b_r = np.array([np.vdot(psi, op(r, m) @ psi).real for m in range(3)])
        c = np.array([[np.vdot(psi, op(q, m) @ (op(r, n) @ psi)).real for n in range(3)] for m in range(3)])
        out[(q, r)] = (b_q, b_r, c)
    return out
