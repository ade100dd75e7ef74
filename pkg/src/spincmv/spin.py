"""Observable algebra for pairs of spin-1/2 particles.

Conventions used throughout the package:

* single-spin basis ordered (up, down) with ``sigma_z |up> = +|up>``;
* two-spin basis ordered ``uu, ud, du, dd`` (first factor is spin *i*);
* correlation matrices are 3x3 real arrays indexed ``[mu, nu]`` with
  ``mu`` acting on spin *i* and ``nu`` on spin *j*, axis order x, y, z.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import NonPhysicalDensity, NonPhysicalObservables, NotSymmetric

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z])
PAULI_XYZ = PAULI[1:]

# Levi-Civita symbol
EPSILON = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPSILON[_a, _b, _c] = 1.0
    EPSILON[_b, _a, _c] = -1.0

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


def _matrix3(m, name="matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def _vector3(v, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {v.shape}")
    return v


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PairObservables:
    """Bloch vectors and raw/connected correlations of one spin pair."""

    b_i: np.ndarray
    b_j: np.ndarray
    c_raw: np.ndarray
    c_connected: np.ndarray
    separation: int = 1
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for name in ("b_i", "b_j"):
            object.__setattr__(self, name, _frozen(_vector3(getattr(self, name), name)))
        for name in ("c_raw", "c_connected"):
            object.__setattr__(self, name, _frozen(_matrix3(getattr(self, name), name)))
        mismatch = np.max(np.abs(self.c_raw - np.outer(self.b_i, self.b_j) - self.c_connected))
        if mismatch > 1e-12:
            raise ValueError(f"c_connected inconsistent with c_raw and Bloch vectors ({mismatch:.2e})")

    @classmethod
    def from_raw(cls, b_i, b_j, c_raw, separation=1, meta=None) -> "PairObservables":
        b_i, b_j, c_raw = _vector3(b_i), _vector3(b_j), _matrix3(c_raw)
        return cls(b_i, b_j, c_raw, connected(c_raw, b_i, b_j), separation, dict(meta or {}))

    @classmethod
    def from_connected(cls, b_i, b_j, c_connected, separation=1, meta=None) -> "PairObservables":
        b_i, b_j, c_connected = _vector3(b_i), _vector3(b_j), _matrix3(c_connected)
        c_raw = c_connected + np.outer(b_i, b_j)
        return cls(b_i, b_j, c_raw, c_raw - np.outer(b_i, b_j), separation, dict(meta or {}))


def validate_density(rho) -> np.ndarray:
    """Return ``rho`` as a complex 4x4 array or raise :class:`NonPhysicalDensity`."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise NonPhysicalDensity(f"two-spin density matrix must be 4x4, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise NonPhysicalDensity("density matrix has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise NonPhysicalDensity(f"density matrix not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NonPhysicalDensity(f"density matrix trace is {tr!r}, expected 1")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -PSD_TOL:
        raise NonPhysicalDensity(f"density matrix has negative eigenvalue {lowest:.3e}")
    return rho


def pauli_coefficients(rho) -> np.ndarray:
    """The 4x4 real table ``S[a, b] = Tr(rho sigma_a (x) sigma_b)`` with index 0 the identity."""
    rho = np.asarray(rho, dtype=complex)
    s = np.einsum("aij,bkl,jlik->ab", PAULI, PAULI, rho.reshape(2, 2, 2, 2))
    return s.real


def pair_observables_from_density(rho, separation: int = 1) -> PairObservables:
    rho = validate_density(rho)
    s = pauli_coefficients(rho)
    return PairObservables.from_raw(s[1:, 0], s[0, 1:], s[1:, 1:], separation)


def density_from_pair_observables(obs: PairObservables, tol: float = PSD_TOL) -> np.ndarray:
    """Rebuild the two-spin density matrix from Bloch vectors and correlations.

    Raises :class:`NonPhysicalObservables` when the assembled operator has an
    eigenvalue below ``-tol``.
    """
    s = np.empty((4, 4))
    s[0, 0] = 1.0
    s[1:, 0] = obs.b_i
    s[0, 1:] = obs.b_j
    s[1:, 1:] = obs.c_raw
    rho = 0.25 * np.einsum("ab,aij,bkl->ikjl", s, PAULI, PAULI).reshape(4, 4)
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -tol:
        raise NonPhysicalObservables(
            f"observables assemble to an operator with eigenvalue {lowest:.3e}"
        )
    return rho


def connected(c_raw, b_i, b_j) -> np.ndarray:
    return _matrix3(c_raw) - np.outer(_vector3(b_i), _vector3(b_j))


def antisym(a) -> np.ndarray:
    """Antisymmetric matrix ``A[alpha, beta] = eps[alpha, beta, gamma] a[gamma]``."""
    return np.einsum("abc,c->ab", EPSILON, _vector3(a))


def split_symmetric_antisymmetric(c) -> tuple[np.ndarray, np.ndarray]:
    """Split ``c`` into its symmetric part and the pseudovector of its antisymmetric part.

    The pseudovector is ``a[gamma] = 1/2 eps[alpha, beta, gamma] A[alpha, beta]``,
    so ``sym + antisym(a)`` reproduces ``c``.
    """
    c = _matrix3(c)
    sym = 0.5 * (c + c.T)
    a = 0.5 * np.einsum("abc,ab->c", EPSILON, 0.5 * (c - c.T))
    return sym, a


def rotate(c, r) -> np.ndarray:
    """Correlation matrix seen in a rotated frame, ``R^T C R``."""
    r = np.asarray(r, dtype=float)
    return r.T @ _matrix3(c) @ r


class ShapeLabel(str, enum.Enum):
    ZERO = "Zero"
    DUMBBELL = "Dumbbell"
    DISK = "Disk"
    CLOVER = "Clover"
    ELLIPSOID = "Ellipsoid"
    WHEEL_AND_AXLE = "WheelAndAxle"


@dataclass(frozen=True)
class ShapeClass:
    """Rank/sign taxonomy of a symmetric correlation matrix.

    ``eigenvalues`` are sorted in descending order. ``principal_axes`` holds
    the eigenvectors as rows, ordered by descending ``|lambda|``, and
    ``axis_eigenvalues`` the eigenvalue belonging to each row.
    """

    label: ShapeLabel
    eigenvalues: np.ndarray
    principal_axes: np.ndarray
    axis_eigenvalues: np.ndarray
    rank: int


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    k = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    return v if v[k] > 0 else -v


def classify_shape(c_sym, tol: float = 1e-8, symmetry_tol: float = 1e-10) -> ShapeClass:
    """Label the level-set topology of a symmetric correlation matrix.

    Eigenvalues with ``|lambda| <= tol * max(1, max|lambda|)`` count as zero.
    """
    c = _matrix3(c_sym)
    asym = np.max(np.abs(c - c.T))
    if asym > symmetry_tol:
        raise NotSymmetric(f"matrix is not symmetric (max |C - C^T| = {asym:.3e})")
    if tol <= 0:
        raise ValueError("tol must be positive")
    w, v = np.linalg.eigh(0.5 * (c + c.T))
    cutoff = tol * max(1.0, float(np.max(np.abs(w))))
    nonzero = w[np.abs(w) > cutoff]
    rank = len(nonzero)
    positive = int(np.sum(nonzero > 0))
    mixed = 0 < positive < rank
    if rank == 0:
        label = ShapeLabel.ZERO
    elif rank == 1:
        label = ShapeLabel.DUMBBELL
    elif rank == 2:
        label = ShapeLabel.CLOVER if mixed else ShapeLabel.DISK
    else:
        label = ShapeLabel.WHEEL_AND_AXLE if mixed else ShapeLabel.ELLIPSOID

    order = sorted(range(3), key=lambda k: (-abs(w[k]), -w[k]))
    axes = np.array([_canonical_sign(v[:, k]) for k in order])
    return ShapeClass(
        label=label,
        eigenvalues=np.sort(w)[::-1].copy(),
        principal_axes=axes,
        axis_eigenvalues=w[order].copy(),
        rank=rank,
    )


# Real spherical harmonics for l <= 2 written on the unit vector (x, y, z).
_K0 = 0.5 / np.sqrt(np.pi)
_K1 = np.sqrt(3.0 / (4.0 * np.pi))
_K2 = 0.5 * np.sqrt(15.0 / np.pi)
_K20 = 0.25 * np.sqrt(5.0 / np.pi)
_K22 = 0.25 * np.sqrt(15.0 / np.pi)

LM_PAIRS = [(0, 0), (1, -1), (1, 0), (1, 1), (2, -2), (2, -1), (2, 0), (2, 1), (2, 2)]


def real_spherical_harmonic(l: int, m: int, theta, phi):
    """Orthonormal real spherical harmonic ``Y_lm`` for ``l <= 2``.

    Positive ``m`` carries the cosine (x-like) combination, negative ``m`` the
    sine (y-like) one, without a Condon-Shortley sign.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    x = np.sin(theta) * np.cos(phi)
    y = np.sin(theta) * np.sin(phi)
    z = np.cos(theta)
    table = {
        (0, 0): lambda: _K0 * np.ones_like(z),
        (1, -1): lambda: _K1 * y,
        (1, 0): lambda: _K1 * z,
        (1, 1): lambda: _K1 * x,
        (2, -2): lambda: _K2 * x * y,
        (2, -1): lambda: _K2 * y * z,
        (2, 0): lambda: _K20 * (3 * z * z - 1),
        (2, 1): lambda: _K2 * x * z,
        (2, 2): lambda: _K22 * (x * x - y * y),
    }
    try:
        return table[(l, m)]()
    except KeyError:
        raise ValueError(f"no real spherical harmonic for l={l}, m={m}") from None


@dataclass(frozen=True)
class IrreducibleParts:
    """Scalar, pseudovector and traceless-symmetric pieces of a 3x3 matrix.

    ``a_lm`` expands the angular profile so that the l=0 and l=2 sectors
    reproduce ``e^T C e`` on the unit sphere and the l=1 sector gives
    ``c1 . e``.
    """

    c0: float
    c1: np.ndarray
    c2: np.ndarray
    a_lm: Mapping[tuple[int, int], float]

    def reconstruct(self) -> np.ndarray:
        return self.c0 * np.eye(3) + antisym(self.c1) + self.c2


def irreducible_decompose(c) -> IrreducibleParts:
    c = _matrix3(c)
    sym, a = split_symmetric_antisymmetric(c)
    c0 = float(np.trace(c) / 3.0)
    c2 = sym - c0 * np.eye(3)
    a_lm = {
        (0, 0): c0 / _K0,
        (1, -1): a[1] / _K1,
        (1, 0): a[2] / _K1,
        (1, 1): a[0] / _K1,
        (2, -2): 2 * c2[0, 1] / _K2,
        (2, -1): 2 * c2[1, 2] / _K2,
        (2, 0): 0.5 * c2[2, 2] / _K20,
        (2, 1): 2 * c2[0, 2] / _K2,
        (2, 2): 0.5 * (c2[0, 0] - c2[1, 1]) / _K22,
    }
    return IrreducibleParts(c0=c0, c1=_frozen(a), c2=_frozen(c2), a_lm=a_lm)


def spherical_profile(parts: IrreducibleParts, l_select: Iterable[int], theta, phi):
    """Partial sum of ``a_lm Y_lm(theta, phi)`` over the selected ``l`` sectors."""
    ls = set(l_select)
    if not ls:
        raise ValueError("l_select must not be empty")
    if not ls <= {0, 1, 2}:
        raise ValueError(f"l_select must be a subset of {{0, 1, 2}}, got {sorted(ls)}")
    total = np.zeros(np.broadcast(np.asarray(theta), np.asarray(phi)).shape)
    for l, m in LM_PAIRS:
        if l in ls:
            total = total + parts.a_lm[(l, m)] * real_spherical_harmonic(l, m, theta, phi)
    return total


def connected_three_spin(bloch, pair_raw, triple) -> np.ndarray:
    """Third joint cumulant of three spins.

    Parameters
    ----------
    bloch : (3, 3) array
        Row ``k`` is the Bloch vector of spin ``k``.
    pair_raw : mapping
        Raw two-spin correlations keyed ``(0, 1)``, ``(0, 2)``, ``(1, 2)``.
    triple : (3, 3, 3) array
        ``<sigma^mu_0 sigma^nu_1 sigma^gamma_2>``.
    """
    b = np.asarray(bloch, dtype=float)
    if b.shape != (3, 3):
        raise ValueError("bloch must be a 3x3 array of Bloch vectors")
    t = np.asarray(triple, dtype=float)
    if t.shape != (3, 3, 3):
        raise ValueError("triple must have shape (3, 3, 3)")
    c01 = connected(pair_raw[(0, 1)], b[0], b[1])
    c02 = connected(pair_raw[(0, 2)], b[0], b[2])
    c12 = connected(pair_raw[(1, 2)], b[1], b[2])
    return (
        t
        - np.einsum("a,bc->abc", b[0], c12)
        - np.einsum("b,ac->abc", b[1], c02)
        - np.einsum("c,ab->abc", b[2], c01)
        - np.einsum("a,b,c->abc", b[0], b[1], b[2])
    )
