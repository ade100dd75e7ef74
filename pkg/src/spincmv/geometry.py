"""Quadratic and multilinear forms, compactified level sets and their meshes.

A correlation matrix ``C`` is drawn as the two level sets ``Q_f = +P`` and
``Q_f = -P`` of the compactified form ``Q_f(r) = r^T C r / (1 + |r|^2)^(3/2)``.
Order-``N`` tensors use ``F(r) / (1 + |r|^2)^((N+1)/2)`` with the same
extraction code, so an order-2 tensor reproduces the matrix meshes exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import bisect
from skimage.measure import marching_cubes, mesh_surface_area

from .errors import GridTooCoarse, NoLevelSet, NotUnit

DEFAULT_LEVEL = 0.01
# peak of r^2 / (1 + r^2)^(3/2), reached at r = sqrt(2)
PROFILE_PEAK = 2 / (3 * math.sqrt(3))
REFINE_CHANGE = 0.2


@dataclass(frozen=True)
class GridSpec:
    """Cubic sampling grid spanning ``[-half_extent, half_extent]^3``."""

    half_extent: float = 4.0
    resolution: int = 96

    def __post_init__(self):
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")
        if int(self.resolution) != self.resolution or self.resolution < 16:
            raise ValueError("resolution must be an integer >= 16")

    @property
    def spacing(self) -> float:
        return 2 * self.half_extent / (self.resolution - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_extent, self.half_extent, self.resolution)

    def points(self) -> np.ndarray:
        x = self.axis()
        return np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)


@dataclass(frozen=True)
class LevelSetMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    sign: int
    level: float
    clipped: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        f = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("triangle index out of range")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", f)

    @property
    def empty(self) -> bool:
        return len(self.triangles) == 0

    def area(self) -> float:
        if self.empty:
            return 0.0
        return float(mesh_surface_area(self.vertices, self.triangles))

    def scaled(self, factor: float) -> "LevelSetMesh":
        return LevelSetMesh(self.vertices * factor, self.triangles, self.sign, self.level, self.clipped)


def _points(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape[-1] != 3:
        raise ValueError("points must have a trailing dimension of 3")
    return r


def multilinear_form(tensor, r) -> np.ndarray:
    """Contract an order-``N`` tensor on ``{x,y,z}^N`` with ``N`` copies of ``r``."""
    t = np.asarray(tensor, dtype=float)
    if t.ndim < 2 or any(d != 3 for d in t.shape):
        raise ValueError("tensor must have order >= 2 with every dimension equal to 3")
    r = _points(r)
    n = t.ndim
    flat = r.reshape(-1, 3)
    # contract the last index first, then peel off one copy of r per step
    acc = flat @ t.reshape(3 ** (n - 1), 3).T
    for _ in range(n - 1):
        acc = np.einsum("bij,bj->bi", acc.reshape(len(flat), -1, 3), flat)
    return acc.reshape(r.shape[:-1])


def quad_form(C, r) -> np.ndarray:
    """``r^T C r`` for one point or an array of points."""
    c = np.asarray(C, dtype=float)
    if c.shape != (3, 3):
        raise ValueError("C must be 3x3")
    return multilinear_form(c, r)


def compactified_multilinear(tensor, r) -> np.ndarray:
    t = np.asarray(tensor, dtype=float)
    r = _points(r)
    r2 = np.sum(r * r, axis=-1)
    return multilinear_form(t, r) / (1 + r2) ** ((t.ndim + 1) / 2)


def compactified(C, r) -> np.ndarray:
    """``r^T C r / (1 + |r|^2)^(3/2)``."""
    c = np.asarray(C, dtype=float)
    if c.shape != (3, 3):
        raise ValueError("C must be 3x3")
    return compactified_multilinear(c, r)


def correlation_along(C, e) -> float:
    """Connected correlation along the unit direction ``e``."""
    e = np.asarray(e, dtype=float)
    norm = float(np.linalg.norm(e))
    if abs(norm - 1) > 1e-10:
        raise NotUnit(f"direction has norm {norm!r}")
    return float(e @ np.asarray(C, dtype=float) @ e)


def pseudovector_form(a, r, compact: bool = False) -> np.ndarray:
    """Linear form ``a . r``; with ``compact`` divided by ``1 + |r|^2``."""
    a = np.asarray(a, dtype=float)
    r = _points(r)
    val = r @ a
    if compact:
        val = val / (1 + np.sum(r * r, axis=-1))
    return val


# ---------------------------------------------------------------- level sets


def _refine_vertices(idx: np.ndarray, field: Callable, target: float, grid: GridSpec) -> np.ndarray:
    """Move marching-cubes vertices onto the exact level set.

    Vertices on a grid edge are bisected along that edge. The few vertices
    placed inside a cube (ambiguous cases) get a short Newton projection.
    """
    h = grid.spacing
    lo = -grid.half_extent
    pos = lo + idx * h
    if len(idx) == 0:
        return pos
    frac = idx - np.round(idx)
    off_grid = np.abs(frac) > 1e-9
    n_off = off_grid.sum(axis=1)

    edge = n_off == 1
    if np.any(edge):
        axis = np.argmax(off_grid[edge], axis=1)
        a = pos[edge].copy()
        rows = np.arange(len(a))
        base = np.floor(idx[edge][rows, axis])
        a[rows, axis] = lo + base * h
        b = a.copy()
        b[rows, axis] = lo + (base + 1) * h
        fa = field(a) - target
        fb = field(b) - target
        ok = fa * fb <= 0
        for _ in range(60):
            mid = 0.5 * (a + b)
            fm = field(mid) - target
            left = (fa * fm) <= 0
            b = np.where((left & ok)[:, None], mid, b)
            a = np.where((~left & ok)[:, None], mid, a)
            fa = np.where(~left & ok, fm, fa)
        refined = 0.5 * (a + b)
        sub = pos[edge]
        sub[ok] = refined[ok]
        pos[edge] = sub

    inner = n_off > 1
    if np.any(inner):
        p = pos[inner]
        eps = 1e-6 * max(1.0, grid.half_extent)
        for _ in range(8):
            f = field(p) - target
            grad = np.stack(
                [(field(p + eps * e) - field(p - eps * e)) / (2 * eps) for e in np.eye(3)], axis=-1
            )
            g2 = np.sum(grad * grad, axis=-1)
            step = np.where(g2 > 0, f / np.where(g2 > 0, g2, 1), 0.0)
            p = p - step[:, None] * grad
        pos[inner] = p
    return pos


def _touches_boundary(values: np.ndarray, level: float) -> bool:
    faces = [values[0], values[-1], values[:, 0], values[:, -1], values[:, :, 0], values[:, :, -1]]
    return any(bool(np.any(f >= level)) for f in faces)


def _extract_signed(values: np.ndarray, field: Callable, level: float, sign: int, grid: GridSpec) -> LevelSetMesh:
    signed = sign * values
    if not np.any(signed >= level) or not np.any(signed < level):
        # every sample above the level means the surface exists but lies outside
        # the grid or between samples, so flag it rather than report "no surface"
        unresolved = bool(np.all(signed >= level))
        return LevelSetMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), sign, level, unresolved)
    verts, faces, _, _ = marching_cubes(signed, level=level, method="lewiner", allow_degenerate=False)
    pos = _refine_vertices(verts.astype(float), lambda p: sign * field(p), level, grid)
    return LevelSetMesh(pos, faces.astype(np.int64), sign, level, _touches_boundary(signed, level))


def _extract_field(field: Callable, P: float, grid: GridSpec, check_refinement: bool):
    if not P > 0:
        raise ValueError("level P must be positive")
    values = field(grid.points())
    meshes = tuple(_extract_signed(values, field, P, s, grid) for s in (1, -1))
    if check_refinement:
        fine_grid = GridSpec(grid.half_extent, 2 * grid.resolution)
        fine_values = field(fine_grid.points())
        for m in meshes:
            fine = _extract_signed(fine_values, field, P, m.sign, fine_grid)
            a0, a1 = m.area(), fine.area()
            if a0 == 0 and a1 == 0:
                continue
            # a surface that only appears on the finer grid counts as a 100% change
            change = abs(a1 - a0) / max(a0, a1)
            if change > REFINE_CHANGE:
                warnings.warn(
                    f"{'positive' if m.sign > 0 else 'negative'} level set area changes by "
                    f"{100 * change:.1f}% when the grid is refined",
                    GridTooCoarse,
                    stacklevel=3,
                )
    return meshes


def extract_level_sets_multilinear(tensor, P: float = DEFAULT_LEVEL, grid: GridSpec | None = None, check_refinement: bool = False):
    """Positive and negative level-set meshes of the compactified order-``N`` form.

    Returns ``(positive, negative)``. With ``check_refinement`` the extraction
    is repeated at twice the resolution and :class:`GridTooCoarse` is warned
    when a mesh's surface area changes by more than 20%.
    """
    grid = grid or GridSpec()
    t = np.asarray(tensor, dtype=float)
    return _extract_field(lambda r: compactified_multilinear(t, r), P, grid, check_refinement)


def extract_level_sets(C, P: float = DEFAULT_LEVEL, grid: GridSpec | None = None, check_refinement: bool = False):
    """Positive and negative level-set meshes of ``Q_f`` for a 3x3 correlation matrix."""
    c = np.asarray(C, dtype=float)
    if c.shape != (3, 3):
        raise ValueError("C must be 3x3")
    return extract_level_sets_multilinear(c, P, grid, check_refinement)


def extract_pseudovector_level_sets(a, P: float = DEFAULT_LEVEL, grid: GridSpec | None = None):
    grid = grid or GridSpec()
    a = np.asarray(a, dtype=float)
    return _extract_field(lambda r: pseudovector_form(a, r, compact=True), P, grid, False)


# ------------------------------------------------------------------ extents


def _profile(c: float, r: float) -> float:
    return c * r * r / (1 + r * r) ** 1.5


def cmv_extent(C, e, P: float = DEFAULT_LEVEL) -> tuple[float, float, float]:
    """Inner and outer radius of the level set along ``e`` and their difference.

    The relevant lobe follows the sign of the correlation along ``e``.
    Raises :class:`NoLevelSet` when the radial profile never reaches ``P``.
    """
    if not P > 0:
        raise ValueError("level P must be positive")
    c = abs(correlation_along(C, e))
    if c * PROFILE_PEAK <= P:
        raise NoLevelSet(f"|C(e)| = {c:.6g} gives a profile maximum below P = {P:.6g}")
    peak = math.sqrt(2.0)
    g = lambda r: _profile(c, r) - P  # noqa: E731
    r_in = bisect(g, 0.0, peak, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=500)
    r_out = bisect(g, peak, 2 * c / P + 2, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=500)
    return r_in, r_out, r_out - r_in


def size_asymptote(c: float, P: float = DEFAULT_LEVEL) -> float:
    """Large-``c/P`` approximation of the extent, ``c/P - sqrt(P/c)``."""
    c = abs(c)
    return c / P - math.sqrt(P / c)


def fit_grid(C, P: float = DEFAULT_LEVEL, resolution: int = 96, margin: float = 1.05) -> GridSpec:
    """Grid just large enough to hold both level sets of ``C``."""
    w, v = np.linalg.eigh(0.5 * (np.asarray(C, dtype=float) + np.asarray(C, dtype=float).T))
    k = int(np.argmax(np.abs(w)))
    try:
        _, r_out, _ = cmv_extent(np.diag(w), np.eye(3)[k], P)
    except NoLevelSet:
        return GridSpec(resolution=resolution)
    return GridSpec(half_extent=margin * r_out, resolution=resolution)
