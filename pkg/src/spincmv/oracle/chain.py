"""State-vector tools for small spin chains.

Basis states are integers whose bit ``N - 1 - i`` encodes site ``i``
(0 = up, 1 = down), so site 0 is the most significant tensor factor and the
ordering agrees with ``np.kron(site0, site1, ...)``.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_SIGMAS = (_SX, _SY, _SZ)

MAX_SPINS = 14


def spin_values(N: int) -> np.ndarray:
    """``(2**N, N)`` table of sigma^z eigenvalues (+1 up, -1 down) per basis state."""
    s = np.arange(1 << N)
    bits = (s[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1
    return 1 - 2 * bits


def product_state(spinors) -> np.ndarray:
    return reduce(np.kron, [np.asarray(v, dtype=complex) for v in spinors])


def ed_ising_evolve(N: int, theta: float, J: float, t: float, boundary: str = "open") -> np.ndarray:
    """Evolve the tilted ferromagnet under ``-J sum s^z s^z`` by exact phase multiplication."""
    if N > MAX_SPINS:
        raise ValueError(f"N={N} exceeds the oracle limit of {MAX_SPINS} spins")
    if boundary not in ("open", "periodic"):
        raise ValueError("boundary must be 'open' or 'periodic'")
    spinor = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
    psi = product_state([spinor] * N)
    z = spin_values(N)
    bonds = z[:, :-1] * z[:, 1:]
    energy = -J * bonds.sum(axis=1)
    if boundary == "periodic" and N > 2:
        energy = energy - J * z[:, -1] * z[:, 0]
    return np.exp(-1j * energy * t) * psi


def partial_trace_pair(state: np.ndarray, N: int, i: int, j: int) -> np.ndarray:
    """Reduced 4x4 density matrix of sites ``i`` (first factor) and ``j``."""
    if i == j:
        raise ValueError("sites must differ")
    if not (0 <= i < N and 0 <= j < N):
        raise ValueError("site index out of range")
    psi = np.asarray(state, dtype=complex).reshape((2,) * N)
    m = np.moveaxis(psi, (i, j), (0, 1)).reshape(4, -1)
    return m @ m.conj().T


def reduce_density(rho: np.ndarray, N: int, i: int, j: int) -> np.ndarray:
    """Pair density matrix from a full ``2**N`` density operator."""
    if i == j:
        raise ValueError("sites must differ")
    t = np.asarray(rho).reshape((2,) * (2 * N))
    keep = [i, j]
    rest = [k for k in range(N) if k not in keep]
    perm = keep + rest + [N + k for k in keep] + [N + k for k in rest]
    t = np.transpose(t, perm).reshape(4, 1 << (N - 2), 4, 1 << (N - 2))
    return np.einsum("aibi->ab", t)


def pair_expectations(rho_pair: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bloch vectors and raw correlations from a 4x4 pair density matrix by direct traces."""
    eye = np.eye(2)
    b_i = np.array([np.trace(rho_pair @ np.kron(s, eye)).real for s in _SIGMAS])
    b_j = np.array([np.trace(rho_pair @ np.kron(eye, s)).real for s in _SIGMAS])
    c = np.array([[np.trace(rho_pair @ np.kron(a, b)).real for b in _SIGMAS] for a in _SIGMAS])
    return b_i, b_j, c


def three_spin_expectations(state: np.ndarray) -> tuple[np.ndarray, dict, np.ndarray]:
    """All one-, two- and three-point Pauli expectations of a three-spin pure state."""
    psi = np.asarray(state, dtype=complex)
    eye = np.eye(2)

    def ev(ops):
        return np.vdot(psi, reduce(np.kron, ops) @ psi).real

    bloch = np.array([[ev([s if k == site else eye for k in range(3)]) for s in _SIGMAS] for site in range(3)])
    pairs = {}
    for a, b in ((0, 1), (0, 2), (1, 2)):
        pairs[(a, b)] = np.array(
            [
                [ev([sa if k == a else sb if k == b else eye for k in range(3)]) for sb in _SIGMAS]
                for sa in _SIGMAS
            ]
        )
    triple = np.array([[[ev([sa, sb, sc]) for sc in _SIGMAS] for sb in _SIGMAS] for sa in _SIGMAS])
    return bloch, pairs, triple
