"""Runge-Kutta integration of the Ising master equation with spontaneous emission.

The Ising Hamiltonian is diagonal in the z basis, so the coherent part acts
elementwise on the density matrix and each jump operator is a permutation of
matrix entries. No superoperator is ever formed.
"""

from __future__ import annotations

import numpy as np

from ..errors import StepSizeTooLarge
from .chain import product_state, spin_values

MAX_SPINS = 6
TRACE_DRIFT_TOL = 1e-8


class _Generator:
    def __init__(self, N: int, J: float, gamma: float):
        z = spin_values(N)
        energy = -J * np.sum(z[:, :-1] * z[:, 1:], axis=1)
        self.phase = -1j * (energy[:, None] - energy[None, :])
        self.gamma = gamma
        up = (z == 1).astype(float)
        # sigma^+ sigma^- is the up projector on each site
        self.anti = -0.5 * gamma * (up.sum(axis=1)[:, None] + up.sum(axis=1)[None, :])
        dim = 1 << N
        s = np.arange(dim)
        self.jumps = []
        for i in range(N):
            mask = 1 << (N - 1 - i)
            down = s[(s & mask) != 0]
            self.jumps.append((down, down ^ mask))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = (self.phase + self.anti) * rho
        for down, src in self.jumps:
            out[np.ix_(down, down)] += self.gamma * rho[np.ix_(src, src)]
        return out


def lindblad_trajectory(N: int, theta: float, J: float, gamma: float, times, dt: float | None = None):
    """Density operators at each of the non-decreasing ``times``.

    ``dt`` defaults to ``1e-3 / max(J, gamma)``; the last step before each
    requested time is shortened so the output lands on it exactly.
    """
    if N > MAX_SPINS:
        raise ValueError(f"N={N} exceeds the oracle limit of {MAX_SPINS} spins")
    scale = max(abs(J), gamma, 1e-300)
    if dt is None:
        dt = 1e-3 / scale
    if dt <= 0:
        raise ValueError("dt must be positive")
    times = [float(t) for t in times]
    if any(b < a for a, b in zip(times, times[1:])) or (times and times[0] < 0):
        raise ValueError("times must be non-negative and non-decreasing")

    gen = _Generator(N, J, gamma)
    spinor = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
    psi = product_state([spinor] * N)
    rho = np.outer(psi, psi.conj())
    now = 0.0
    out = []
    for target in times:
        nsteps = int(np.ceil((target - now) / dt - 1e-9))
        if nsteps > 0:
            h = (target - now) / nsteps
            for _ in range(nsteps):
                k1 = gen(rho)
                k2 = gen(rho + 0.5 * h * k1)
                k3 = gen(rho + 0.5 * h * k2)
                k4 = gen(rho + h * k3)
                rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            now = target
        drift = abs(np.trace(rho) - 1)
        if drift > TRACE_DRIFT_TOL:
            raise StepSizeTooLarge(f"trace drifted by {drift:.3e}; reduce dt")
        out.append(rho.copy())
    return out


def lindblad_rk4(N: int, theta: float, J: float, gamma: float, t: float, dt: float | None = None) -> np.ndarray:
    return lindblad_trajectory(N, theta, J, gamma, [t], dt)[0]
