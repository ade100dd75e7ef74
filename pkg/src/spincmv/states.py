"""Named two-spin states used as reference shapes.

Each preset is returned as a 4x4 density matrix in the ``uu, ud, du, dd``
basis. The three-spin presets are reduced to the pair (0, 1) by an explicit
partial trace.
"""

from __future__ import annotations

import numpy as np

UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)


def _ket(*spins: np.ndarray) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for s in spins:
        out = np.kron(out, s)
    return out


def _projector(psi: np.ndarray) -> np.ndarray:
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def ghz3() -> np.ndarray:
    return (_ket(UP, UP, UP) + _ket(DOWN, DOWN, DOWN)) / np.sqrt(2)


def w3() -> np.ndarray:
    """Three-spin W state with a single up spin."""
    return (_ket(UP, DOWN, DOWN) + _ket(DOWN, UP, DOWN) + _ket(DOWN, DOWN, UP)) / np.sqrt(3)


def _reduce_first_pair(psi3: np.ndarray) -> np.ndarray:
    m = psi3.reshape(4, 2)
    return m @ m.conj().T


def _bell(kind: str) -> np.ndarray:
    uu, ud, du, dd = _ket(UP, UP), _ket(UP, DOWN), _ket(DOWN, UP), _ket(DOWN, DOWN)
    table = {
        "phi+": uu + dd,
        "phi-": uu - dd,
        "psi+": ud + du,
        "psi-": ud - du,
    }
    return _projector(table[kind])


PRESETS = {
    "bell-phi+": lambda: _bell("phi+"),
    "bell-phi-": lambda: _bell("phi-"),
    "bell-psi+": lambda: _bell("psi+"),
    "bell-psi-": lambda: _bell("psi-"),
    "ghz3-pair": lambda: _reduce_first_pair(ghz3()),
    "w3-pair": lambda: _reduce_first_pair(w3()),
    # equal mixture of the two aligned z product states
    "mixed-zz": lambda: 0.5 * (_projector(_ket(UP, UP)) + _projector(_ket(DOWN, DOWN))),
    # equal mixture of the two anti-aligned z product states
    "mixed-updown": lambda: 0.5 * (_projector(_ket(UP, DOWN)) + _projector(_ket(DOWN, UP))),
}


def preset_density(name: str) -> np.ndarray:
    """Density matrix of a named preset such as ``"bell-phi+"``."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown state preset {name!r}; choose from {sorted(PRESETS)}") from None
