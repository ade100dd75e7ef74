"""Nearest-neighbour Ising quench from a tilted ferromagnet, with and without decay.

The chain evolves under ``H = -J sum sigma^z_i sigma^z_{i+1}`` from the product
state ``cos(theta/2)|up> + sin(theta/2)|down>`` on every site. The dissipative
variant adds spontaneous emission (``|up> -> |down>``) at rate ``gamma``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import UnvalidatedRegime
from ..spin import PairObservables

ASYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class IsingParams:
    J: float = 1.0
    theta: float = math.pi / 2
    gamma: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError("theta must lie in [0, pi]")
        if self.t < 0:
            raise ValueError("t must be non-negative")


def _g(sign: int, x: float, theta: float) -> complex:
    c2 = math.cos(theta / 2) ** 2
    s2 = math.sin(theta / 2) ** 2
    return c2 * np.exp(-2j * x) + sign * s2 * np.exp(2j * x)


def _assemble(cpp: complex, cpm: complex, cpz: complex, czz: float) -> np.ndarray:
    """Cartesian raw correlations from the ladder-operator correlators.

    Uses ``sigma^+- = sigma^x +- i sigma^y`` together with
    ``c^{-+-} = conj(c^{+-+})`` and ``c^{-z} = conj(c^{+z})``.
    """
    cmm = np.conj(cpp)
    cmp_ = np.conj(cpm)
    cmz = np.conj(cpz)
    xx = (cpp + cmm + cpm + cmp_) / 4
    yy = (cpm + cmp_ - cpp - cmm) / 4
    xy = (cpp - cmm - cpm + cmp_) / 4j
    yx = (cpp - cmm + cpm - cmp_) / 4j
    xz = (cpz + cmz) / 2
    yz = (cpz - cmz) / 2j
    c = np.real(np.array([[xx, xy, xz], [yx, yy, yz], [xz, yz, czz]]))
    asym = abs(c[0, 1] - c[1, 0])
    if asym > ASYMMETRY_TOL:
        raise AssertionError(f"assembled correlation matrix asymmetric by {asym:.3e}")
    return 0.5 * (c + c.T)


def _check_n(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError("pair separation n must be >= 1")
    return n


def ising_coherent(params: IsingParams, n: int = 1) -> PairObservables:
    """Bloch vectors and correlations of sites ``k`` and ``k + n`` in an infinite chain."""
    n = _check_n(n)
    if params.gamma != 0:
        raise ValueError("ising_coherent requires gamma = 0; use ising_dissipative")
    th = params.theta
    x = params.J * params.t
    st, ct = math.sin(th), math.cos(th)
    gp = lambda y: _g(+1, y, th)  # noqa: E731
    gm = lambda y: _g(-1, y, th)  # noqa: E731

    b_plus = st * gp(x) ** 2
    b = np.array([b_plus.real, b_plus.imag, ct])

    if n == 1:
        cpp = st**2 * gp(x) * gp(x)
        cpm = st**2 * gp(x) * gp(-x)
        cpz = st * gm(x) * gp(x)
    elif n == 2:
        cpp = st**2 * gp(2 * x) * gp(x) * gp(x)
        cpm = st**2 * gp(0.0) * gp(x) * gp(-x)
        cpz = st * ct * gp(x) ** 2
    else:
        cpp = st**2 * (gp(x) * gp(x)) ** 2
        cpm = st**2 * (gp(x) * gp(-x)) ** 2
        cpz = st * ct * gp(x) ** 2
    c_raw = _assemble(cpp, cpm, cpz, ct * ct)
    meta = {"model": "ising", "J": params.J, "theta": th, "t": params.t}
    return PairObservables.from_raw(b, b, c_raw, n, meta)


def _sinc(z):
    """``sin(z)/z`` for complex ``z`` with the removable point handled by its series."""
    z = complex(z)
    if abs(z) < 1e-6:
        return 1 - z * z / 6 + z**4 / 120
    return np.sin(z) / z


def _phi(coupling: float, gamma: float, t: float) -> complex:
    s = 2 * (1j * gamma / 4 - coupling)
    return np.exp(-gamma * t / 2) * (np.cos(s * t) + gamma * t / 2 * _sinc(s * t))


def _psi(coupling: float, gamma: float, t: float) -> complex:
    s = 2 * (1j * gamma / 4 - coupling)
    return np.exp(-gamma * t / 2) * (1j * s - gamma / 2) * t * _sinc(s * t)


def ising_dissipative(params: IsingParams, n: int = 1) -> PairObservables:
    """Same pair observables under spontaneous emission at rate ``gamma``.

    The closed forms were checked only for an initial state on the equator
    (``theta = pi/2``); other angles enter through ``b^z`` alone and trigger an
    :class:`UnvalidatedRegime` warning plus a ``meta`` flag.
    """
    n = _check_n(n)
    J, G, t, th = params.J, params.gamma, params.t, params.theta
    unvalidated = not math.isclose(th, math.pi / 2, rel_tol=0.0, abs_tol=1e-12)
    if unvalidated:
        warnings.warn(
            f"dissipative Ising closed forms are unvalidated at theta={th!r}",
            UnvalidatedRegime,
            stacklevel=2,
        )
    phi = lambda c: _phi(c, G, t)  # noqa: E731
    decay = math.exp(-G * t)
    half = math.exp(-G * t / 2)

    bz = (decay - 1.0) + decay * math.cos(th)
    b_plus = half * phi(J) ** 2
    b = np.array([b_plus.real, b_plus.imag, bz])

    if n == 1:
        cpp = decay * phi(J) * phi(J)
        cpm = decay * phi(J) * phi(-J)
        cpz = half * _psi(J, G, t) * phi(J)
    elif n == 2:
        cpp = decay * phi(2 * J) * phi(J) * phi(J)
        cpm = decay * phi(0.0) * phi(J) * phi(-J)
        cpz = half * phi(J) ** 2 * bz
    else:
        cpp = decay * (phi(J) * phi(J)) ** 2
        cpm = decay * (phi(J) * phi(-J)) ** 2
        cpz = half * phi(J) ** 2 * bz
    c_raw = _assemble(cpp, cpm, cpz, bz * bz)
    meta = {
        "model": "ising-lindblad",
        "J": J,
        "gamma": G,
        "theta": th,
        "t": t,
        "unvalidated_regime": unvalidated,
    }
    return PairObservables.from_raw(b, b, c_raw, n, meta)
